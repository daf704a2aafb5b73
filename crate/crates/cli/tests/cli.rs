use std::io::Write;
use std::process::{Command, Output, Stdio};

const F35: &str = "p=3 m=5 modulus=1,1,2,2,0,1";
const U35: &str = "0,1,0,2";
const F55: &str = "p=5 m=5 modulus=3,2,1,3,4,1";
const U55: &str = "0,3,2,1";
const F44: &str = "p=2 m=8 modulus=1,0,1,1,0,0,0,1,1";
const U44: &str = "0,0,1,0,0,0,0,1";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracepart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tracepart"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

/// The single stderr line of a failed run, parsed.
fn error_line(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim()).expect("stderr is one JSON line")
}

#[test]
fn btable_all_methods_are_consistent() {
    let o = run(&[
        "btable", "--field", F35, "--u", U35, "--method", "all", "--format", "json",
    ]);
    assert!(o.status.success());
    let doc = json(&o);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["verdict"], "consistent");
    let tables = doc["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 4);
    for t in tables {
        assert_eq!(
            t["table"],
            serde_json::json!([[23, 29, 29], [29, 20, 32], [29, 32, 20]])
        );
    }
}

#[test]
fn btable_csv_is_byte_stable() {
    let args = ["btable", "--field", F55, "--u", U55, "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("h,k,count\n0,0,145\n0,1,120\n"));
    assert!(text.ends_with("4,4,132\n"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn btable_extension_base() {
    let o = run(&[
        "btable", "--field", F44, "--u", U44, "--s", "2", "--format", "json",
    ]);
    assert!(o.status.success());
    let doc = json(&o);
    assert_eq!(doc["s"], 2);
    assert_eq!(doc["table"][0], serde_json::json!([19, 15, 15, 15]));
    let o = run(&[
        "btable",
        "--field",
        F44,
        "--u",
        U44,
        "--s",
        "2",
        "--method",
        "kloosterman",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "PrimeBaseOnly");
}

#[test]
fn btable_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = run(&[
        "btable",
        "--field",
        F35,
        "--u",
        U35,
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("h,k,count\n0,0,23\n"));
}

#[test]
fn field_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f35.txt");
    std::fs::write(&path, format!("{F35}\n")).unwrap();
    let o = run(&["field", "--field-file", path.to_str().unwrap()]);
    assert!(o.status.success());
    let doc = json(&o);
    assert_eq!(doc["order"], 243);
    assert_eq!(doc["primitive_modulus"], true);
    std::fs::write(&path, format!("{F35}\n{F35}\n")).unwrap();
    let o = run(&["field", "--field-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_and_validation_errors_exit_2() {
    let cases: &[(&[&str], &str)] = &[
        (
            &["btable", "--field", F35, "--u", U35, "--s", "2"],
            "NonDivisorDegree",
        ),
        (&["btable", "--field", F35, "--u", "0,0"], "ZeroParameter"),
        (
            &["btable", "--field", F35, "--u", "0,3"],
            "CoefficientOutOfRange",
        ),
        (
            &[
                "btable",
                "--field",
                "p=3 m=5 modulus=1,1,2,2,0,1 junk",
                "--u",
                U35,
            ],
            "Parse",
        ),
        (
            &["btable", "--field", "p=2 m=2 modulus=1,0,1", "--u", "1"],
            "ReducibleModulus",
        ),
        (
            &["btable", "--field", F35, "--u", U35, "--method", "fast"],
            "Usage",
        ),
        (&["btable", "--u", U35], "Usage"),
        (
            &["prng", "--field", F35, "--u", U35, "--entropy", "seed:xyz"],
            "Parse",
        ),
        (&["prng", "--width", "10", "--mode", "relaxed"], "Usage"),
        (
            &[
                "verify",
                "--field",
                F35,
                "--u",
                U35,
                "--inject-fault",
                "5,0",
            ],
            "OutOfDomain",
        ),
        (&["frobnicate"], "Usage"),
    ];
    for (args, kind) in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_line(&o)["error"], *kind, "{args:?}");
    }
}

#[test]
fn verify_reports_and_fault_injection() {
    let o = run(&["verify", "--field", F55, "--u", U55]);
    assert!(o.status.success());
    let doc = json(&o);
    assert_eq!(doc["pass"], true);
    assert_eq!(
        doc["checks"]["weil_envelope"]["integer_range"],
        serde_json::json!([13, 237])
    );

    let o = run(&[
        "verify",
        "--field",
        F35,
        "--u",
        U35,
        "--inject-fault",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let doc = json(&o);
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["checks"]["symmetry"]["pass"], false);
    assert!(o.stderr.is_empty());
}

#[test]
fn verify_random_parameters() {
    // Twenty nonzero u, stepping through the field by a fixed stride.
    for i in 0..20u64 {
        let idx = 1 + (i * 97 + 13) % 242;
        let coeffs: Vec<String> = (0..5)
            .map(|j| ((idx / 3u64.pow(j)) % 3).to_string())
            .collect();
        let u = coeffs.join(",");
        let o = run(&["verify", "--field", F35, "--u", &u]);
        assert!(o.status.success(), "u = {u}: {}", stdout(&o));
    }
}

#[test]
fn kloosterman_csv() {
    let o = run(&["kloosterman", "--field", F35, "--u", U35]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "t,c_0,c_1,c_2,real_value\n1,86,78,78,8.000000000\n2,62,90,90,-28.000000000\n"
    );
}

#[test]
fn prng_is_deterministic_under_a_seed() {
    let args = [
        "prng",
        "--field",
        F35,
        "--u",
        U35,
        "--count",
        "5",
        "--entropy",
        "seed:0000",
    ];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
    let values: Vec<u64> = stdout(&a).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|&v| v == 1 || v == 2));
}

#[test]
fn prng_width_stays_in_range() {
    let o = run(&[
        "prng",
        "--width",
        "10",
        "--count",
        "500",
        "--entropy",
        "seed:ab",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.parse::<u64>().unwrap() < 10));
    let o = run(&["prng", "--width", "10", "--field", F35]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn prng_empty_entropy_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty");
    std::fs::write(&path, b"").unwrap();
    let entropy = format!("file:{}", path.display());
    let o = run(&["prng", "--field", F35, "--u", U35, "--entropy", &entropy]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_line(&o)["error"], "EntropyExhausted");
}

#[test]
fn prng_piped_into_audit_passes() {
    let o = run(&[
        "prng",
        "--field",
        F55,
        "--u",
        U55,
        "--count",
        "100000",
        "--entropy",
        "seed:0102",
    ]);
    assert!(o.status.success());
    let a = run_with_stdin(&["audit", "--bins", "4", "--min", "1"], &o.stdout);
    assert!(a.status.success());
    let doc = json(&a);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["samples"], 100000);
}

#[test]
fn audit_failures() {
    let constant = "3\n".repeat(100);
    let o = run_with_stdin(&["audit", "--bins", "4"], constant.as_bytes());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);

    let o = run_with_stdin(&["audit", "--bins", "4"], b"0\n1\n2\n3\n");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "InsufficientSamples");

    let o = run_with_stdin(&["audit", "--bins", "4"], b"0\nseven\n");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "Parse");
}

#[test]
fn help_documents_exit_codes() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in [
        "EXIT STATUS",
        "ENTROPY",
        "FIELD SPECIFICATION",
        "btable",
        "audit",
    ] {
        assert!(text.contains(needle), "{needle}");
    }
}
