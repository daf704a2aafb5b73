//! Cardinality arrays `B_hk` of the trace partition under `f(z) = u/z`.
//!
//! `B_hk` counts the α whose trace (into the base field GF(p^s)) is the h-th
//! base element and whose image `f(α)` has trace equal to the k-th one.
//! Index 0 is always the zero trace value. On a prime base the remaining
//! indices are the residues `1..p` in natural order; on a proper extension
//! base they follow the [`SubfieldView`](crate::SubfieldView) power order.
//!
//! Tables can be built four ways: a single classifying pass
//! ([`btable_bruteforce`]), the literal indicator sum with norm-power
//! indicators ([`btable_norm_indicator`]), the Kloosterman double sum
//! ([`btable_kloosterman`], prime base only) and the closed forms for the
//! first column and the off-diagonal block ([`btable_closed_form`]).

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{checked_pow, inv_mod_prime, pow_mod};
use crate::error::{Error, Result};
use crate::field::{parse_coeff_list, FieldElement, FieldSpec};
use crate::kloosterman::{prime_char_kloosterman, spectrum};
use crate::{Cyclotomic, Spectrum};

/// Version stamped into every JSON document this crate emits.
pub const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BruteForce,
    NormIndicatorFormula,
    KloostermanFormula,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BruteForce => "brute-force",
            Method::NormIndicatorFormula => "norm-indicator-formula",
            Method::KloostermanFormula => "kloosterman-formula",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// The involution `α ↦ u/α`, `0 ↦ 0`.
#[derive(Clone, Debug)]
pub struct InvolutionU {
    u: FieldElement,
}

impl InvolutionU {
    pub fn new(u: FieldElement) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::ZeroParameter);
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> &FieldElement {
        &self.u
    }

    pub fn apply(&self, a: &FieldElement) -> FieldElement {
        if a.is_zero() {
            a.clone()
        } else {
            &self.u * &a.inv().expect("nonzero")
        }
    }

    /// Checks `f(f(α)) = α` for every α; returns the first failure.
    pub fn verify_exhaustive(&self) -> std::result::Result<(), FieldElement> {
        let field = self.u.field();
        match field.elements().find(|a| self.apply(&self.apply(a)) != *a) {
            None => Ok(()),
            Some(a) => Err(a),
        }
    }
}

/// Trace values of the base field GF(q), q = p^s, in table order, together
/// with a representative `β_h` of each trace class.
#[derive(Clone, Debug)]
pub struct TraceClassIndex {
    field: FieldSpec,
    s: usize,
    omegas: Vec<FieldElement>,
    representatives: Vec<FieldElement>,
    lookup: HashMap<u64, usize>,
}

impl TraceClassIndex {
    /// Representatives chosen as base-field constants `ω_h / r` when
    /// `r = m/s` is invertible mod p, otherwise the first element of each
    /// class in enumeration order.
    pub fn canonical(field: &FieldSpec, s: usize) -> Result<Self> {
        let r = field.check_divisor(s)?;
        let p = field.characteristic();
        let omegas = Self::ordered_omegas(field, s)?;
        let representatives = if !(r as u64).is_multiple_of(p) {
            let r_inv = inv_mod_prime(r as u64 % p, p);
            omegas.iter().map(|w| w.scale(r_inv)).collect()
        } else {
            Self::search_representatives(field, s, &omegas)?
        };
        Self::assemble(field, s, omegas, representatives)
    }

    /// Representatives found by linear search in enumeration order.
    pub fn by_search(field: &FieldSpec, s: usize) -> Result<Self> {
        field.check_divisor(s)?;
        let omegas = Self::ordered_omegas(field, s)?;
        let representatives = Self::search_representatives(field, s, &omegas)?;
        Self::assemble(field, s, omegas, representatives)
    }

    /// Shifts every representative by `z`, which must have zero trace.
    pub fn with_offset(&self, z: &FieldElement) -> Result<Self> {
        if !z.trace_rel(self.s)?.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "offset {z} does not have zero trace"
            )));
        }
        let representatives = self
            .representatives
            .iter()
            .map(|b| b.try_add(z))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(&self.field, self.s, self.omegas.clone(), representatives)
    }

    fn ordered_omegas(field: &FieldSpec, s: usize) -> Result<Vec<FieldElement>> {
        if s == 1 {
            Ok((0..field.characteristic())
                .map(|c| field.constant(c))
                .collect())
        } else {
            Ok(field.subfield_view(s)?.elements().to_vec())
        }
    }

    fn search_representatives(
        field: &FieldSpec,
        s: usize,
        omegas: &[FieldElement],
    ) -> Result<Vec<FieldElement>> {
        let mut found: Vec<Option<FieldElement>> = vec![None; omegas.len()];
        let position: HashMap<u64, usize> = omegas
            .iter()
            .enumerate()
            .map(|(i, w)| (w.to_index(), i))
            .collect();
        let mut missing = omegas.len();
        for a in field.elements() {
            let h = position[&a.trace_rel(s)?.to_index()];
            if found[h].is_none() {
                found[h] = Some(a);
                missing -= 1;
                if missing == 0 {
                    break;
                }
            }
        }
        Ok(found
            .into_iter()
            .map(|b| b.expect("trace is onto"))
            .collect())
    }

    fn assemble(
        field: &FieldSpec,
        s: usize,
        omegas: Vec<FieldElement>,
        representatives: Vec<FieldElement>,
    ) -> Result<Self> {
        for (b, w) in representatives.iter().zip(&omegas) {
            if b.trace_rel(s)? != *w {
                return Err(Error::InvalidArgument(format!(
                    "representative {b} does not have trace {w}"
                )));
            }
        }
        let lookup = omegas
            .iter()
            .enumerate()
            .map(|(i, w)| (w.to_index(), i))
            .collect();
        Ok(Self {
            field: field.clone(),
            s,
            omegas,
            representatives,
            lookup,
        })
    }

    pub fn base_degree(&self) -> usize {
        self.s
    }

    /// Number of trace classes, q = p^s.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[FieldElement] {
        &self.omegas
    }

    pub fn representatives(&self) -> &[FieldElement] {
        &self.representatives
    }

    /// Table index of the trace class containing `a`.
    pub fn class_of(&self, a: &FieldElement) -> usize {
        if self.s == 1 {
            a.trace_abs() as usize
        } else {
            let t = a
                .trace_rel(self.s)
                .expect("divisor checked at construction");
            self.lookup[&t.to_index()]
        }
    }
}

/// Square array of trace-class cardinalities with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct BTable {
    field: FieldSpec,
    u: FieldElement,
    s: usize,
    method: Method,
    n: usize,
    entries: Vec<u64>,
}

/// Serialized form of a [`BTable`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BTableRecord {
    pub schema: u32,
    pub p: u64,
    pub m: usize,
    pub s: usize,
    pub u: String,
    pub method: Method,
    pub table: Vec<Vec<u64>>,
}

impl BTable {
    fn new(
        field: &FieldSpec,
        u: &FieldElement,
        s: usize,
        method: Method,
        n: usize,
        entries: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self {
            field: field.clone(),
            u: u.clone(),
            s,
            method,
            n,
            entries,
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn u(&self) -> &FieldElement {
        &self.u
    }

    pub fn base_degree(&self) -> usize {
        self.s
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Side length, i.e. the base field order.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, h: usize, k: usize) -> u64 {
        self.entries[h * self.n + k]
    }

    /// Overwrites one entry. Only meant for building negative controls.
    pub fn set(&mut self, h: usize, k: usize, value: u64) {
        self.entries[h * self.n + k] = value;
    }

    pub fn row(&self, h: usize) -> &[u64] {
        &self.entries[h * self.n..(h + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n).map(|h| self.row(h).to_vec()).collect()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().sum()
    }

    /// Size of one trace class, `q^(r-1)` with q the base order.
    pub fn class_size(&self) -> u64 {
        self.field.order() / self.n as u64
    }

    /// Same entries, ignoring provenance.
    pub fn same_entries(&self, other: &BTable) -> bool {
        self.n == other.n && self.entries == other.entries
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn to_record(&self) -> BTableRecord {
        BTableRecord {
            schema: JSON_SCHEMA_VERSION,
            p: self.field.characteristic(),
            m: self.field.degree(),
            s: self.s,
            u: self.u.to_string(),
            method: self.method,
            table: self.rows(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("table serializes")
    }

    /// Rebuilds a table from its record, given the field it was computed in.
    pub fn from_record(field: &FieldSpec, record: &BTableRecord) -> Result<Self> {
        if record.p != field.characteristic() || record.m != field.degree() {
            return Err(Error::FieldMismatch);
        }
        let n = field.subfield_order(record.s)? as usize;
        if record.table.len() != n || record.table.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                found: record.table.len(),
            });
        }
        let u = field.element(&parse_coeff_list(&record.u)?)?;
        let entries = record.table.iter().flatten().copied().collect();
        Ok(Self::new(field, &u, record.s, record.method, n, entries))
    }

    /// `h,k,count` lines under a header, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,k,count\n");
        for h in 0..self.n {
            for k in 0..self.n {
                writeln!(out, "{h},{k},{}", self.get(h, k)).unwrap();
            }
        }
        out
    }
}

fn validate_u(field: &FieldSpec, u: &FieldElement) -> Result<()> {
    if !u.field().same_field(field) {
        return Err(Error::FieldMismatch);
    }
    if u.is_zero() {
        return Err(Error::ZeroParameter);
    }
    Ok(())
}

/// `δ_p(a)`: 1 iff the absolute trace of `a` is zero.
pub fn delta_p(a: &FieldElement) -> u8 {
    (a.trace_abs() == 0) as u8
}

/// `δ_p(a)` as the character average `(1/p) Σ_j ζ^{j Tr(a)}`.
pub fn delta_p_by_characters(a: &FieldElement) -> u8 {
    let p = a.field().characteristic();
    let t = a.trace_abs() as i64;
    let sum = (0..p as i64).fold(Cyclotomic::zero(p as usize), |acc, j| {
        &acc + &Cyclotomic::root_power(p as usize, j * t)
    });
    let avg = sum
        .checked_div_exact(p as i64)
        .and_then(|z| z.as_rational())
        .expect("character average is 0 or 1");
    avg as u8
}

/// `δ_q(a) = 1 - N_p(Tr_q(a))^(p-1) mod p`, q = p^s.
pub fn delta_q(a: &FieldElement, s: usize) -> Result<u8> {
    let p = a.field().characteristic();
    let norm = a.trace_rel(s)?.subfield_norm_to_prime(s)?;
    let v = (1 + p - pow_mod(norm, p - 1, p)) % p;
    debug_assert_eq!(v == 1, a.trace_rel(s)?.is_zero());
    Ok(v as u8)
}

/// One pass over the field, classifying `(class(α), class(u/α))`.
pub fn btable_bruteforce(field: &FieldSpec, u: &FieldElement, s: usize) -> Result<BTable> {
    validate_u(field, u)?;
    let classes = TraceClassIndex::canonical(field, s)?;
    let f = InvolutionU::new(u.clone())?;
    let n = classes.len();
    let entries = (0..field.order())
        .into_par_iter()
        .fold(
            || vec![0u64; n * n],
            |mut acc, i| {
                let a = field.from_index(i);
                let h = classes.class_of(&a);
                let k = classes.class_of(&f.apply(&a));
                acc[h * n + k] += 1;
                acc
            },
        )
        .reduce(|| vec![0u64; n * n], merge_counts);
    Ok(BTable::new(field, u, s, Method::BruteForce, n, entries))
}

fn merge_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// `B_hk = Σ_α δ_q(α - β_h) δ_q(f(α) - β_k)` evaluated term by term with
/// the norm-power indicator and the given representatives.
pub fn btable_norm_indicator(
    field: &FieldSpec,
    u: &FieldElement,
    classes: &TraceClassIndex,
) -> Result<BTable> {
    validate_u(field, u)?;
    let s = classes.base_degree();
    let f = InvolutionU::new(u.clone())?;
    let betas = classes.representatives();
    let n = betas.len();
    let entries = (0..field.order())
        .into_par_iter()
        .map(|i| {
            let a = field.from_index(i);
            let fa = f.apply(&a);
            let left = betas
                .iter()
                .map(|b| delta_q(&(&a - b), s))
                .collect::<Result<Vec<_>>>()?;
            let right = betas
                .iter()
                .map(|b| delta_q(&(&fa - b), s))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = vec![0u64; n * n];
            for (h, &l) in left.iter().enumerate() {
                for (k, &r) in right.iter().enumerate() {
                    acc[h * n + k] += (l * r) as u64;
                }
            }
            Ok(acc)
        })
        .try_reduce(|| vec![0u64; n * n], |a, b| Ok(merge_counts(a, b)))?;
    Ok(BTable::new(
        field,
        u,
        s,
        Method::NormIndicatorFormula,
        n,
        entries,
    ))
}

/// Collapses `p² · B` assembled in Z[ζ_p] to the integer B.
fn collapse(z: &Cyclotomic, p: u64, what: &str) -> Result<u64> {
    let p2 = (p * p) as i64;
    let n = z
        .as_rational()
        .ok_or_else(|| Error::NonIntegerCollapse(format!("{what}: {z} is not rational")))?;
    if n % p2 != 0 {
        return Err(Error::NonIntegerCollapse(format!(
            "{what}: {n} is not divisible by {p2}"
        )));
    }
    u64::try_from(n / p2)
        .map_err(|_| Error::NonIntegerCollapse(format!("{what}: negative count {}", n / p2)))
}

fn prime_spectrum(field: &FieldSpec, u: &FieldElement) -> Result<Spectrum> {
    validate_u(field, u)?;
    spectrum(field, u)
}

/// Table assembled from the Kloosterman spectrum through
/// `p² B_hk = q + Σ_{j,ℓ=1}^{p-1} ζ^{-jh-ℓk} (1 + K(χ_p, jℓu))`.
pub fn btable_kloosterman(field: &FieldSpec, u: &FieldElement) -> Result<BTable> {
    let spec = prime_spectrum(field, u)?;
    btable_from_spectrum(&spec)
}

pub fn btable_from_spectrum(spec: &Spectrum) -> Result<BTable> {
    let field = spec.field();
    let p = field.characteristic();
    let pu = p as usize;
    let q = field.order() as i64;
    let one = Cyclotomic::from_int(pu, 1);
    let mut entries = vec![0u64; pu * pu];
    for h in 0..p {
        for k in 0..p {
            let mut acc = Cyclotomic::from_int(pu, q);
            for j in 1..p {
                for l in 1..p {
                    let phase = Cyclotomic::root_power(pu, -((j * h + l * k) as i64));
                    let term = &phase * &(&one + &spec.exact(j * l));
                    acc = &acc + &term;
                }
            }
            entries[(h * p + k) as usize] = collapse(&acc, p, &format!("B[{h}][{k}]"))?;
        }
    }
    Ok(BTable::new(
        field,
        spec.u(),
        1,
        Method::KloostermanFormula,
        pu,
        entries,
    ))
}

/// The common value of `B_h0`, `h ≠ 0`:
/// `p² B_h0 = q - (p-1) - Σ_{t=1}^{p-1} K(χ_p, tu)`.
pub fn b_h0_closed_form(field: &FieldSpec, u: &FieldElement) -> Result<u64> {
    let spec = prime_spectrum(field, u)?;
    b_h0_from_spectrum(&spec)
}

fn b_h0_from_spectrum(spec: &Spectrum) -> Result<u64> {
    let field = spec.field();
    let p = field.characteristic();
    let head = Cyclotomic::from_int(p as usize, field.order() as i64 - (p as i64 - 1));
    collapse(&(&head - &spec.sum_exact()), p, "B[h][0]")
}

/// `p² B_00 = q + (p-1)² + (p-1) Σ_t K(χ_p, tu)`.
pub fn b_00_closed_form(field: &FieldSpec, u: &FieldElement) -> Result<u64> {
    let spec = prime_spectrum(field, u)?;
    b_00_from_spectrum(&spec)
}

fn b_00_from_spectrum(spec: &Spectrum) -> Result<u64> {
    let field = spec.field();
    let p = field.characteristic() as i64;
    let head = Cyclotomic::from_int(p as usize, field.order() as i64 + (p - 1) * (p - 1));
    collapse(
        &(&head + &spec.sum_exact().scale(p - 1)),
        p as u64,
        "B[0][0]",
    )
}

/// Entries `B_hk` with `h, k ≥ 1`, stored as a (p-1)×(p-1) block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffDiagonal {
    p: usize,
    values: Vec<u64>,
}

impl OffDiagonal {
    /// `B_hk` for `1 ≤ h, k < p`.
    pub fn get(&self, h: usize, k: usize) -> u64 {
        assert!(h >= 1 && k >= 1 && h < self.p && k < self.p);
        self.values[(h - 1) * (self.p - 1) + (k - 1)]
    }
}

/// `p² B_hk = q + 1 + Σ_{t=1}^{p-1} K(χ_o, thk) K(χ_p, tu)` for `hk ≠ 0`,
/// with `K(χ_o, ·)` the Kloosterman sum over the prime field.
pub fn btable_offdiag_formula(field: &FieldSpec, u: &FieldElement) -> Result<OffDiagonal> {
    let spec = prime_spectrum(field, u)?;
    offdiag_from_spectrum(&spec)
}

fn offdiag_from_spectrum(spec: &Spectrum) -> Result<OffDiagonal> {
    let field = spec.field();
    let p = field.characteristic();
    let pu = p as usize;
    let q = field.order() as i64;
    let mut values = Vec::with_capacity((pu - 1) * (pu - 1));
    for h in 1..p {
        for k in 1..p {
            let mut acc = Cyclotomic::from_int(pu, q + 1);
            for t in 1..p {
                let outer: Cyclotomic = prime_char_kloosterman(p, t * h % p * k);
                acc = &acc + &(&outer * &spec.exact(t));
            }
            values.push(collapse(&acc, p, &format!("B[{h}][{k}]"))?);
        }
    }
    Ok(OffDiagonal { p: pu, values })
}

/// Full prime-base table from the closed forms: `B_00`, the constant first
/// column (mirrored into row 0 by symmetry) and the off-diagonal block.
pub fn btable_closed_form(field: &FieldSpec, u: &FieldElement) -> Result<BTable> {
    let spec = prime_spectrum(field, u)?;
    let p = field.characteristic() as usize;
    let corner = b_00_from_spectrum(&spec)?;
    let column = b_h0_from_spectrum(&spec)?;
    let block = offdiag_from_spectrum(&spec)?;
    let mut entries = vec![0u64; p * p];
    entries[0] = corner;
    for h in 1..p {
        entries[h * p] = column;
        entries[h] = column;
        for k in 1..p {
            entries[h * p + k] = block.get(h, k);
        }
    }
    Ok(BTable::new(field, u, 1, Method::ClosedForm, p, entries))
}

/// `b_4 = Σ_β N_p(Tr_q(β))^(p-1) · N_p(Tr_q(u/β) - 1)^(p-1)`, each factor
/// reduced mod p and summed as an integer.
pub fn b4_sum(field: &FieldSpec, u: &FieldElement, s: usize) -> Result<u64> {
    validate_u(field, u)?;
    field.check_divisor(s)?;
    if s == field.degree() {
        return Err(Error::ProperSubfieldOnly("b4 sum"));
    }
    let p = field.characteristic();
    let f = InvolutionU::new(u.clone())?;
    let one = field.one();
    let norm_power = |x: &FieldElement| -> Result<u64> {
        let n = x.subfield_norm_to_prime(s)?;
        Ok(pow_mod(n, p - 1, p))
    };
    (0..field.order())
        .into_par_iter()
        .map(|i| {
            let beta = field.from_index(i);
            let a = norm_power(&beta.trace_rel(s)?)?;
            let b = norm_power(&(&f.apply(&beta).trace_rel(s)? - &one))?;
            Ok(a * b)
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))
}

/// `B_0h = 2 q^(r-1) - q^r + b_4` for `h ≠ 0`, q = p^s.
pub fn b_0h_closed_form(field: &FieldSpec, u: &FieldElement, s: usize) -> Result<u64> {
    let b4 = b4_sum(field, u, s)?;
    let r = field.check_divisor(s)?;
    let q = field.subfield_order(s)?;
    let qr = field.order() as i64;
    let qr1 = checked_pow(q, r - 1).expect("fits") as i64;
    let value = 2 * qr1 - qr + b4 as i64;
    u64::try_from(value).map_err(|_| Error::NonIntegerCollapse(format!("B[0][h] = {value}")))
}

/// Outcome of one structural check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Verdict {
    fn ok() -> Self {
        Self {
            pass: true,
            at: None,
            detail: None,
        }
    }

    fn fail(at: Option<(usize, usize)>, detail: String) -> Self {
        Self {
            pass: false,
            at,
            detail: Some(detail),
        }
    }
}

/// `B_hk = B_kh` for all h, k.
pub fn verify_symmetry(table: &BTable) -> Verdict {
    let n = table.size();
    for h in 0..n {
        for k in h + 1..n {
            if table.get(h, k) != table.get(k, h) {
                return Verdict::fail(
                    Some((h, k)),
                    format!(
                        "B[{h}][{k}] = {} but B[{k}][{h}] = {}",
                        table.get(h, k),
                        table.get(k, h)
                    ),
                );
            }
        }
    }
    Verdict::ok()
}

/// All `B_h0`, `h ≥ 1`, are equal.
pub fn verify_column_constancy(table: &BTable) -> Verdict {
    let n = table.size();
    if n < 2 {
        return Verdict::ok();
    }
    let first = table.get(1, 0);
    match (2..n).find(|&h| table.get(h, 0) != first) {
        None => Verdict::ok(),
        Some(h) => Verdict::fail(
            Some((h, 0)),
            format!(
                "B[{h}][0] = {} differs from B[1][0] = {first}",
                table.get(h, 0)
            ),
        ),
    }
}

/// Every row `h ≥ 1`, restricted to `k ≥ 1`, is a permutation of row 1, and
/// the first column is constant below row 0.
pub fn verify_row_permutation(table: &BTable) -> Verdict {
    let n = table.size();
    if n < 2 {
        return Verdict::ok();
    }
    let sorted = |h: usize| {
        let mut v = table.row(h)[1..].to_vec();
        v.sort_unstable();
        v
    };
    let reference = sorted(1);
    for h in 2..n {
        if sorted(h) != reference {
            return Verdict::fail(
                Some((h, 1)),
                format!("row {h} is not a permutation of row 1"),
            );
        }
    }
    verify_column_constancy(table)
}

/// Each row sums to the class size and the grand total is the field order.
pub fn verify_row_sums(table: &BTable) -> Verdict {
    let expected = table.class_size();
    for h in 0..table.size() {
        let sum: u64 = table.row(h).iter().sum();
        if sum != expected {
            return Verdict::fail(
                Some((h, 0)),
                format!("row {h} sums to {sum}, expected {expected}"),
            );
        }
    }
    if table.total() != table.field().order() {
        return Verdict::fail(None, format!("total {} != q", table.total()));
    }
    Verdict::ok()
}

/// Entries compared against `p^(m-2) ± (1 + 2√(p^m))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilReport {
    pub pass: bool,
    pub center: f64,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    /// Integer range strictly inside the envelope.
    pub integer_range: (i64, i64),
    pub min_entry: u64,
    pub max_entry: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<(usize, usize)>,
}

/// Strict envelope check for prime-base tables.
pub fn check_weil_envelope(table: &BTable) -> Result<WeilReport> {
    if table.base_degree() != 1 {
        return Err(Error::PrimeBaseOnly("Weil envelope"));
    }
    let p = table.field().characteristic() as f64;
    let q = table.field().order() as f64;
    let center = q / (p * p);
    let radius = 1.0 + 2.0 * q.sqrt();
    let (lower, upper) = (center - radius, center + radius);
    let n = table.size();
    let mut violation = None;
    'scan: for h in 0..n {
        for k in 0..n {
            let v = table.get(h, k) as f64;
            if !(v > lower && v < upper) {
                violation = Some((h, k));
                break 'scan;
            }
        }
    }
    let integer_range = (strict_ceil(lower), strict_floor(upper));
    Ok(WeilReport {
        pass: violation.is_none(),
        center,
        radius,
        lower,
        upper,
        integer_range,
        min_entry: *table.entries.iter().min().unwrap(),
        max_entry: *table.entries.iter().max().unwrap(),
        violation,
    })
}

// Smallest integer strictly greater than x.
fn strict_ceil(x: f64) -> i64 {
    let c = x.ceil();
    if c == x {
        c as i64 + 1
    } else {
        c as i64
    }
}

// Largest integer strictly less than x.
fn strict_floor(x: f64) -> i64 {
    let f = x.floor();
    if f == x {
        f as i64 - 1
    } else {
        f as i64
    }
}
