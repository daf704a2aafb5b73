use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tracepart::field::parse_coeff_list;
use tracepart::partition::{
    btable_bruteforce, btable_closed_form, btable_kloosterman, btable_norm_indicator,
    check_weil_envelope, verify_column_constancy, verify_row_permutation, verify_row_sums,
    verify_symmetry, JSON_SCHEMA_VERSION,
};
use tracepart::prng::audit_uniformity;
use tracepart::{
    BTable, EntropySpec, Error, FieldElement, FieldSpec, Method, Mode, PrngConfig, PrngStream,
    ReducedStream, Spectrum, TraceClassIndex,
};

use crate::{
    AuditCmd, BtableCmd, Failure, FieldArgs, FieldCmd, Format, KloostermanCmd, MethodArg, ModeArg,
    PrngCmd, VerifyCmd,
};

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load_field(args: &FieldArgs) -> Result<FieldSpec, Failure> {
    match (&args.field, &args.field_file) {
        (Some(text), _) => Ok(text.parse()?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("{} is empty", path.display())))?;
            if lines.next().is_some() {
                return Err(Error::Parse(format!(
                    "{} has more than one non-empty line",
                    path.display()
                ))
                .into());
            }
            Ok(line.parse()?)
        }
        (None, None) => Err(Failure::Usage(
            "one of --field or --field-file is required".into(),
        )),
    }
}

fn parse_u(field: &FieldSpec, text: &str) -> Result<FieldElement, Failure> {
    let u = field.element(&parse_coeff_list(text)?)?;
    if u.is_zero() {
        return Err(Error::ZeroParameter.into());
    }
    Ok(u)
}

fn emit(output: Option<&PathBuf>, text: &str) -> Outcome {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn json_line(v: &Value) -> String {
    format!("{v}\n")
}

pub(crate) fn field(cmd: FieldCmd) -> Outcome {
    let f = load_field(&cmd.field)?;
    let m = f.degree();
    let mut doc = json!({
        "schema": JSON_SCHEMA_VERSION,
        "spec": f.to_string(),
        "p": f.characteristic(),
        "m": m,
        "order": f.order(),
        "modulus": f.modulus(),
        "primitive_modulus": f.is_primitive_modulus(),
        "primitive_element": f.primitive_element()?.to_string(),
        "subfield_degrees": (1..=m).filter(|d| m % d == 0).collect::<Vec<_>>(),
    });
    if let Some(s) = cmd.s {
        let view = f.subfield_view(s)?;
        doc["subfield"] = json!({
            "s": s,
            "generator": view.generator().to_string(),
            "elements": view.elements().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        });
    }
    emit(None, &json_line(&doc))
}

fn compute(method: Method, f: &FieldSpec, u: &FieldElement, s: usize) -> Result<BTable, Error> {
    f.check_divisor(s)?;
    match method {
        Method::BruteForce => btable_bruteforce(f, u, s),
        Method::NormIndicatorFormula => {
            btable_norm_indicator(f, u, &TraceClassIndex::canonical(f, s)?)
        }
        Method::KloostermanFormula if s != 1 => Err(Error::PrimeBaseOnly("kloosterman method")),
        Method::KloostermanFormula => btable_kloosterman(f, u),
        Method::ClosedForm if s != 1 => Err(Error::PrimeBaseOnly("closed-form method")),
        Method::ClosedForm => btable_closed_form(f, u),
    }
}

fn csv_with_method(tables: &[BTable]) -> String {
    let mut out = String::from("method,h,k,count\n");
    for t in tables {
        for (h, row) in t.rows().iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                out.push_str(&format!("{},{h},{k},{c}\n", t.method().as_str()));
            }
        }
    }
    out
}

pub(crate) fn btable(cmd: BtableCmd) -> Outcome {
    let f = load_field(&cmd.field)?;
    let u = parse_u(&f, &cmd.u)?;
    f.check_divisor(cmd.s)?;
    let single = match cmd.method {
        MethodArg::Bruteforce => Some(Method::BruteForce),
        MethodArg::NormIndicator => Some(Method::NormIndicatorFormula),
        MethodArg::Kloosterman => Some(Method::KloostermanFormula),
        MethodArg::ClosedForm => Some(Method::ClosedForm),
        MethodArg::All => None,
    };
    if let Some(method) = single {
        let t = compute(method, &f, &u, cmd.s)?;
        let text = match cmd.format {
            Format::Csv => t.to_csv(),
            Format::Json => format!("{}\n", t.to_json()),
        };
        return emit(cmd.output.as_ref(), &text);
    }

    let methods: &[Method] = if cmd.s == 1 {
        &[
            Method::BruteForce,
            Method::NormIndicatorFormula,
            Method::KloostermanFormula,
            Method::ClosedForm,
        ]
    } else {
        &[Method::BruteForce, Method::NormIndicatorFormula]
    };
    let tables = methods
        .iter()
        .map(|&m| compute(m, &f, &u, cmd.s))
        .collect::<Result<Vec<_>, _>>()?;
    let consistent = tables.iter().all(|t| t.same_entries(&tables[0]));
    let verdict = if consistent {
        "consistent"
    } else {
        "inconsistent"
    };
    let text = match cmd.format {
        Format::Csv => csv_with_method(&tables),
        Format::Json => json_line(&json!({
            "schema": JSON_SCHEMA_VERSION,
            "p": f.characteristic(),
            "m": f.degree(),
            "s": cmd.s,
            "u": u.to_string(),
            "tables": tables.iter().map(|t| t.to_record()).collect::<Vec<_>>(),
            "verdict": verdict,
        })),
    };
    emit(cmd.output.as_ref(), &text)?;
    if cmd.format == Format::Csv {
        eprintln!("verdict: {verdict}");
    }
    if consistent {
        Ok(())
    } else {
        Err(Failure::Disagreement(format!(
            "methods {} disagree",
            methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )))
    }
}

pub(crate) fn kloosterman(cmd: KloostermanCmd) -> Outcome {
    let f = load_field(&cmd.field)?;
    let u = parse_u(&f, &cmd.u)?;
    let spec: Spectrum = tracepart::kloosterman::spectrum(&f, &u)?;
    emit(cmd.output.as_ref(), &spec.to_csv())
}

fn parse_fault(text: &str, n: usize) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--inject-fault expects H,K, got {text:?}"));
    let (h, k) = text.split_once(',').ok_or_else(bad)?;
    let h: usize = h.parse().map_err(|_| bad())?;
    let k: usize = k.parse().map_err(|_| bad())?;
    if h >= n || k >= n {
        return Err(Error::OutOfDomain {
            value: h.max(k) as u64,
            lo: 0,
            hi: n as u64 - 1,
        }
        .into());
    }
    Ok((h, k))
}

pub(crate) fn verify(cmd: VerifyCmd) -> Outcome {
    let f = load_field(&cmd.field)?;
    let u = parse_u(&f, &cmd.u)?;
    let mut t = btable_bruteforce(&f, &u, cmd.s)?;
    if let Some(text) = &cmd.inject_fault {
        let (h, k) = parse_fault(text, t.size())?;
        t.set(h, k, t.get(h, k) + 1);
    }
    let checks = [
        ("symmetry", verify_symmetry(&t)),
        ("row_permutation", verify_row_permutation(&t)),
        ("column_constancy", verify_column_constancy(&t)),
        ("row_sums", verify_row_sums(&t)),
    ];
    let mut pass = checks.iter().all(|(_, v)| v.pass);
    let mut doc_checks = serde_json::Map::new();
    for (name, v) in &checks {
        doc_checks.insert(
            name.to_string(),
            serde_json::to_value(v).expect("serializable"),
        );
    }
    if cmd.s == 1 {
        let w = check_weil_envelope(&t)?;
        pass &= w.pass;
        doc_checks.insert(
            "weil_envelope".into(),
            serde_json::to_value(&w).expect("serializable"),
        );
    }
    let doc = json!({
        "schema": JSON_SCHEMA_VERSION,
        "p": f.characteristic(),
        "m": f.degree(),
        "s": cmd.s,
        "u": u.to_string(),
        "table": t.rows(),
        "checks": doc_checks,
        "pass": pass,
    });
    emit(cmd.output.as_ref(), &json_line(&doc))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

enum Generator {
    Plain(PrngStream),
    Reduced(ReducedStream),
}

impl Generator {
    fn next(&mut self) -> Result<u64, Error> {
        match self {
            Generator::Plain(s) => s.next_value(),
            Generator::Reduced(s) => s.next_value(),
        }
    }
}

pub(crate) fn prng(cmd: PrngCmd) -> Outcome {
    let entropy: EntropySpec = cmd.entropy.parse()?;
    let mut generator = match cmd.width {
        Some(w) => {
            if cmd.field.field.is_some() || cmd.field.field_file.is_some() || cmd.u.is_some() {
                return Err(Failure::Usage(
                    "--width runs on its own field GF(Q^2); drop --field and --u".into(),
                ));
            }
            if cmd.s.is_some() {
                return Err(Failure::Usage("--width does not take --s".into()));
            }
            if cmd.mode == ModeArg::Relaxed {
                return Err(Failure::Usage("--width requires strict mode".into()));
            }
            Generator::Reduced(ReducedStream::new(w, entropy.open()?)?)
        }
        None => {
            let f = load_field(&cmd.field)?;
            let u_text = cmd
                .u
                .as_deref()
                .ok_or_else(|| Failure::Usage("--u is required without --width".into()))?;
            let u = parse_u(&f, u_text)?;
            let mode = match cmd.mode {
                ModeArg::Strict => Mode::Strict,
                ModeArg::Relaxed => Mode::Relaxed,
            };
            let config = PrngConfig::new(&f, cmd.s.unwrap_or(1), u, mode)?;
            Generator::Plain(PrngStream::new(config, entropy.open()?))
        }
    };
    let mut out = BufWriter::new(io::stdout().lock());
    let write_err = |e: io::Error| Failure::Io(format!("stdout: {e}"));
    for _ in 0..cmd.count {
        let value = match generator.next() {
            Ok(v) => v,
            Err(e) => {
                out.flush().map_err(write_err)?;
                return Err(e.into());
            }
        };
        if let Err(e) = writeln!(out, "{value}") {
            return match e.kind() {
                io::ErrorKind::BrokenPipe => Ok(()),
                _ => Err(write_err(e)),
            };
        }
    }
    match out.flush() {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(write_err(e)),
        _ => Ok(()),
    }
}

fn parse_samples(text: &str) -> Result<Vec<u64>, Error> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("line {}: {:?} is not a value", i + 1, l.trim())))
        })
        .collect()
}

pub(crate) fn audit(cmd: AuditCmd) -> Outcome {
    let text = match &cmd.input {
        Some(path) => fs::read_to_string(path).map_err(|e| io_failure(path, e))?,
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
            s
        }
    };
    let samples = parse_samples(&text)?;
    let report = audit_uniformity(&samples, cmd.bins, cmd.min, cmd.significance)?;
    let mut doc = serde_json::to_value(&report).expect("serializable");
    doc["schema"] = json!(JSON_SCHEMA_VERSION);
    emit(None, &json_line(&doc))?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}
