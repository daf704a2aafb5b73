//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{f35, f44, f53, f55, f73, random_nonzero, rng};
use tracepart::kloosterman::{kloosterman_exact, spectrum, REAL_TOLERANCE};
use tracepart::partition::{
    b4_sum, b_0h_closed_form, b_h0_closed_form, btable_bruteforce, btable_closed_form,
    btable_kloosterman, btable_norm_indicator, check_weil_envelope, verify_column_constancy,
    verify_row_permutation, verify_row_sums, verify_symmetry,
};
use tracepart::prng::{
    audit_uniformity, exhaustive_output_counts, find_range_prime, reduce_to_width, Mode,
    DEFAULT_SIGNIFICANCE,
};
use tracepart::{
    BTable, Cyclotomic, EntropySpec, FieldElement, FieldSpec, PrngConfig, PrngStream,
    ReducedStream, Spectrum, TraceClassIndex,
};

type Check = std::result::Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    run: fn() -> Check,
    limit: Option<Duration>,
}

const fn criterion(id: u8, name: &'static str, run: fn() -> Check, secs: u64) -> Criterion {
    let limit = if secs == 0 {
        None
    } else {
        Some(Duration::from_secs(secs))
    };
    Criterion {
        id,
        name,
        run,
        limit,
    }
}

const F35_TABLE: [[u64; 3]; 3] = [[23, 29, 29], [29, 20, 32], [29, 32, 20]];

const F55_TABLE: [[u64; 5]; 5] = [
    [145, 120, 120, 120, 120],
    [120, 132, 108, 141, 124],
    [120, 108, 124, 132, 141],
    [120, 141, 132, 124, 108],
    [120, 124, 141, 108, 132],
];

/// Rows and columns labelled 0, 1, ζ, ζ² with ζ generating GF(4)*.
const F44_TABLE: [[u64; 4]; 4] = [
    [19, 15, 15, 15],
    [15, 12, 21, 16],
    [15, 21, 16, 12],
    [15, 16, 12, 21],
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn matches_golden<const N: usize>(t: &BTable, golden: &[[u64; N]; N]) -> bool {
    t.rows()
        .iter()
        .zip(golden)
        .all(|(r, g)| r.as_slice() == g.as_slice())
}

fn random_parameters(f: &FieldSpec, seed: u8, n: usize) -> Vec<FieldElement> {
    let mut src = rng(seed);
    (0..n).map(|_| random_nonzero(f, &mut src)).collect()
}

/// The random-parameter fields of criterion 4.
fn property_fields() -> Vec<(&'static str, FieldSpec, u8)> {
    vec![
        ("GF(3^5)", f35().0, 101),
        ("GF(5^3)", f53(), 102),
        ("GF(7^3)", f73(), 103),
    ]
}

/// Every prime-base table behind criteria 1, 2 and 4, with its spectrum.
fn prime_base_cases() -> Vec<(String, FieldSpec, FieldElement)> {
    let mut out = vec![
        ("GF(3^5) fixture".to_string(), f35().0, f35().1),
        ("GF(5^5) fixture".to_string(), f55().0, f55().1),
    ];
    for (name, f, seed) in property_fields() {
        for (i, u) in random_parameters(&f, seed, 20).into_iter().enumerate() {
            out.push((format!("{name} trial {i}"), f.clone(), u));
        }
    }
    out
}

fn golden_prime(f: &FieldSpec, u: &FieldElement, golden_ok: impl Fn(&BTable) -> bool) -> Check {
    let brute = btable_bruteforce(f, u, 1).map_err(|e| e.to_string())?;
    let classes = TraceClassIndex::canonical(f, 1).map_err(|e| e.to_string())?;
    let methods = [
        ("brute-force", Ok(brute)),
        ("norm-indicator", btable_norm_indicator(f, u, &classes)),
        ("kloosterman", btable_kloosterman(f, u)),
        ("closed-form", btable_closed_form(f, u)),
    ];
    for (name, t) in methods {
        let t = t.map_err(|e| format!("{name}: {e}"))?;
        ensure(golden_ok(&t), || format!("{name} gave {:?}", t.rows()))?;
    }
    Ok("four methods match the published table".into())
}

fn criterion_1() -> Check {
    let (f, u) = f35();
    let msg = golden_prime(&f, &u, |t| matches_golden(t, &F35_TABLE))?;
    let b = b_h0_closed_form(&f, &u).map_err(|e| e.to_string())?;
    ensure(b == 29, || format!("B_10 closed form = {b}"))?;
    Ok(msg)
}

fn criterion_2() -> Check {
    let (f, u) = f55();
    let msg = golden_prime(&f, &u, |t| matches_golden(t, &F55_TABLE))?;
    let spec: Spectrum = spectrum(&f, &u).map_err(|e| e.to_string())?;
    let sum = spec.sum_exact().as_rational();
    ensure(sum == Some(121), || {
        format!("sum of K(tu) = {sum:?}, expected 121")
    })?;
    let b = b_h0_closed_form(&f, &u).map_err(|e| e.to_string())?;
    ensure(b == 120, || format!("B_10 = {b}"))?;
    Ok(format!("{msg}; B_10 = (3125-4-121)/25 = {b}"))
}

/// Looks for a scalar λ in GF(4)* whose relabelling ω ↦ λω of both indices
/// turns `t` into the published table.
fn f44_relabelling(f: &FieldSpec, t: &BTable) -> Option<usize> {
    let view = f.subfield_view(2).ok()?;
    let elems = view.elements();
    (1..4).find(|&j| {
        let lambda = &elems[j];
        let sigma: Vec<usize> = elems
            .iter()
            .map(|w| view.index_of(&(lambda * w)).unwrap())
            .collect();
        (0..4).all(|h| (0..4).all(|k| F44_TABLE[h][k] == t.get(sigma[h], sigma[k])))
    })
}

fn criterion_3() -> Check {
    let (f, u) = f44();
    let t = btable_bruteforce(&f, &u, 2).map_err(|e| e.to_string())?;
    let b4 = b4_sum(&f, &u, 2).map_err(|e| e.to_string())?;
    let b0h = b_0h_closed_form(&f, &u, 2).map_err(|e| e.to_string())?;
    let column_ok =
        (0..4).all(|h| t.get(h, 0) == F44_TABLE[h][0] && t.get(0, h) == F44_TABLE[0][h]);
    let table_ok = matches_golden(&t, &F44_TABLE);
    let mut notes = vec![
        format!("b4 = {b4}"),
        format!("B_0h = 2*64 - 256 + {b4} = {b0h}"),
        format!(
            "row/column 0 {}",
            if column_ok { "match" } else { "differ" }
        ),
    ];
    if !table_ok {
        notes.push(format!("computed rows {:?}", t.rows()));
        match f44_relabelling(&f, &t) {
            Some(j) => notes.push(format!(
                "published block equals the computed one after relabelling ω -> ζ^{j}·ω"
            )),
            None => notes.push("no GF(4)* relabelling reproduces the published block".into()),
        }
    }
    let summary = notes.join("; ");
    ensure(table_ok && b4 == 143 && b0h == 15, || summary.clone())?;
    Ok(summary)
}

fn criterion_4() -> Check {
    let mut n = 0;
    for (name, f, seed) in property_fields() {
        for u in random_parameters(&f, seed, 20) {
            let brute = btable_bruteforce(&f, &u, 1).map_err(|e| e.to_string())?;
            let klo = btable_kloosterman(&f, &u).map_err(|e| format!("{name}, u = {u}: {e}"))?;
            let closed = btable_closed_form(&f, &u).map_err(|e| format!("{name}, u = {u}: {e}"))?;
            ensure(
                brute.same_entries(&klo) && brute.same_entries(&closed),
                || {
                    format!(
                        "{name}, u = {u}: brute {:?} kloosterman {:?}",
                        brute.rows(),
                        klo.rows()
                    )
                },
            )?;
            n += 1;
        }
    }
    Ok(format!(
        "{n} random parameters, every assembly collapsed to an integer"
    ))
}

fn structural(t: &BTable) -> std::result::Result<(), String> {
    for (name, v) in [
        ("symmetry", verify_symmetry(t)),
        ("column-0 constancy", verify_column_constancy(t)),
        ("row permutation", verify_row_permutation(t)),
        ("row sums", verify_row_sums(t)),
    ] {
        ensure(v.pass, || {
            format!("{name} failed: {:?} on {:?}", v.detail, t.rows())
        })?;
    }
    Ok(())
}

fn criterion_5() -> Check {
    let mut n = 0;
    for (_, f, seed) in property_fields() {
        for u in random_parameters(&f, seed, 20) {
            structural(&btable_bruteforce(&f, &u, 1).map_err(|e| e.to_string())?)?;
            n += 1;
        }
    }
    let (f, _) = f44();
    for u in random_parameters(&f, 104, 10) {
        structural(&btable_bruteforce(&f, &u, 2).map_err(|e| e.to_string())?)?;
        n += 1;
    }
    Ok(format!("{n} tables pass all four structural checks"))
}

fn criterion_6() -> Check {
    let mut envelopes = Vec::new();
    for (name, f, u) in prime_base_cases() {
        let t = btable_bruteforce(&f, &u, 1).map_err(|e| e.to_string())?;
        let w = check_weil_envelope(&t).map_err(|e| e.to_string())?;
        ensure(w.pass, || {
            format!(
                "{name}: entry at {:?} outside ({}, {})",
                w.violation, w.lower, w.upper
            )
        })?;
        if name.ends_with("fixture") {
            envelopes.push((name, w.integer_range));
        }
    }
    let expected = [(-5, 59), (13, 237)];
    for ((name, got), want) in envelopes.iter().zip(expected) {
        ensure(*got == want, || {
            format!("{name}: integer range {got:?}, expected {want:?}")
        })?;
    }
    Ok(envelopes
        .iter()
        .map(|(n, r)| format!("{n} range {r:?}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn criterion_7() -> Check {
    let k = |f: &FieldSpec, a: &FieldElement, b: &FieldElement| -> Cyclotomic {
        kloosterman_exact(f, a, b).unwrap()
    };
    for (name, f, seed) in property_fields() {
        let q1 = f.order() as i64 - 1;
        ensure(
            k(&f, &f.zero(), &f.zero()).as_rational() == Some(q1),
            || format!("{name}: K(0,0)"),
        )?;
        let mut src = rng(seed.wrapping_add(50));
        for _ in 0..20 {
            let a = random_nonzero(&f, &mut src);
            ensure(k(&f, &a, &f.zero()).as_rational() == Some(-1), || {
                format!("{name}: K({a},0)")
            })?;
            ensure(k(&f, &f.zero(), &a).as_rational() == Some(-1), || {
                format!("{name}: K(0,{a})")
            })?;
        }
        for _ in 0..50 {
            let a = random_nonzero(&f, &mut src);
            let b = random_nonzero(&f, &mut src);
            ensure(k(&f, &a, &b) == k(&f, &f.one(), &(&a * &b)), || {
                format!("{name}: K({a},{b}) != K(1,ab)")
            })?;
        }
    }
    let mut values = 0;
    let mut worst: f64 = 0.0;
    for (name, f, u) in prime_base_cases() {
        let spec: Spectrum = spectrum(&f, &u).map_err(|e| format!("{name}: {e}"))?;
        for e in spec.entries() {
            let im = e.exact.evaluate::<f64>().im.abs();
            worst = worst.max(im);
            ensure(im < REAL_TOLERANCE, || {
                format!("{name}: t = {} has imaginary part {im:e}", e.t)
            })?;
            values += 1;
        }
    }
    Ok(format!(
        "{values} spectrum values real (max |Im| = {worst:.1e})"
    ))
}

fn criterion_8() -> Check {
    let mut notes = Vec::new();
    for (name, (f, u), expected_total) in [("GF(3^5)", f35(), 80), ("GF(5^5)", f55(), 624)] {
        let counts = exhaustive_output_counts(&f, &u, 1).map_err(|e| e.to_string())?;
        let total: u64 = counts.iter().sum();
        ensure(total == expected_total, || {
            format!("{name}: {total} zero-trace γ")
        })?;
        ensure(counts[1..].iter().all(|&c| c == counts[1]), || {
            format!("{name}: unequal counts {counts:?}")
        })?;
        notes.push(format!("{name} counts {counts:?}"));
    }
    Ok(notes.join(", "))
}

fn criterion_9() -> Check {
    let (f, u) = f55();
    let seed: EntropySpec = "seed:5eed".parse().unwrap();
    let cfg = PrngConfig::new(&f, 1, u, Mode::Strict).map_err(|e| e.to_string())?;
    let mut stream = PrngStream::new(cfg, seed.open().unwrap());
    let samples = stream.take_values(100_000).map_err(|e| e.to_string())?;
    let strict =
        audit_uniformity(&samples, 4, 1, DEFAULT_SIGNIFICANCE).map_err(|e| e.to_string())?;
    ensure(strict.pass, || format!("strict stream: {strict:?}"))?;

    let mut reduced = ReducedStream::new(10, seed.open().unwrap()).map_err(|e| e.to_string())?;
    let red = *reduced.reduction();
    let samples = reduced.take_values(100_000).map_err(|e| e.to_string())?;
    let width =
        audit_uniformity(&samples, 10, 0, DEFAULT_SIGNIFICANCE).map_err(|e| e.to_string())?;
    ensure(width.pass, || format!("reduced stream: {width:?}"))?;

    ensure(
        red == find_range_prime(10).unwrap() && red.q == 41 && red.mu == 2,
        || format!("{red:?}"),
    )?;
    let mut pre = vec![0u64; 10];
    for r in 1..red.q {
        pre[reduce_to_width(r, &red).map_err(|e| e.to_string())? as usize] += 1;
    }
    ensure(pre.iter().all(|&c| c == 2 * red.mu), || {
        format!("preimages {pre:?}")
    })?;
    Ok(format!(
        "strict chi2 {:.2} < {:.2}; w=10 via Q={} chi2 {:.2} < {:.2}; {} preimages per residue",
        strict.statistic,
        strict.threshold,
        red.q,
        width.statistic,
        width.threshold,
        2 * red.mu
    ))
}

fn main() {
    // A limit of 0 means the criterion has no runtime bound.
    let criteria = [
        criterion(1, "golden table GF(3^5)", criterion_1, 1),
        criterion(2, "golden table GF(5^5)", criterion_2, 5),
        criterion(3, "golden table GF(4^4) over GF(4)", criterion_3, 1),
        criterion(4, "method agreement", criterion_4, 0),
        criterion(5, "theorem suite", criterion_5, 0),
        criterion(6, "Weil envelope", criterion_6, 0),
        criterion(7, "Kloosterman properties", criterion_7, 0),
        criterion(8, "exhaustive generator uniformity", criterion_8, 0),
        criterion(9, "statistical audit", criterion_9, 10),
    ];
    let mut failed = 0;
    for Criterion {
        id,
        name,
        run,
        limit,
    } in criteria
    {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {id} {tag} [{name}] ({:.0?}): {detail}", elapsed);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
