//! A uniform generator over the nonzero trace values, `R = Tr_q(u/γ)` with
//! zero-trace `γ`, plus range reduction and a chi-square audit.
//!
//! All randomness flows through [`EntropySource`], a byte stream. Field
//! elements are drawn coefficient by coefficient with byte-group rejection,
//! so the only bias left is whatever the source itself carries.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, ErrorKind, Read};
use std::path::PathBuf;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{OsRng, RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::partition::TraceClassIndex;

/// Cap on consecutive rejections in any sampling loop.
pub const REJECTION_LIMIT: u64 = 1_000_000;

/// Cap on the multiplier searched by [`find_range_prime`].
pub const MU_LIMIT: u64 = 1_000_000;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.999;

/// A stream of uniformly distributed bytes.
pub trait EntropySource: Send {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()>;
}

impl<E: EntropySource + ?Sized> EntropySource for Box<E> {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        (**self).fill(buf)
    }
}

/// Operating-system randomness.
#[derive(Clone, Copy, Debug, Default)]
pub struct OsEntropy;

impl EntropySource for OsEntropy {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        OsRng
            .try_fill_bytes(buf)
            .map_err(|e| Error::EntropyFailure(e.to_string()))
    }
}

/// Bytes read from any reader; running out is `EntropyExhausted`.
#[derive(Debug)]
pub struct ReaderEntropy<R> {
    reader: R,
}

impl<R: Read + Send> ReaderEntropy<R> {
    pub fn new(reader: R) -> Self {
        Self { reader }
    }
}

impl ReaderEntropy<BufReader<File>> {
    pub fn open(path: &std::path::Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::EntropyFailure(format!("{}: {e}", path.display())))?;
        Ok(Self::new(BufReader::new(file)))
    }
}

impl<R: Read + Send> EntropySource for ReaderEntropy<R> {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.reader.read_exact(buf).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => Error::EntropyExhausted,
            _ => Error::EntropyFailure(e.to_string()),
        })
    }
}

/// Deterministic ChaCha20 keystream. The seed is zero-padded to 32 bytes.
#[derive(Clone, Debug)]
pub struct SeededEntropy(ChaCha20Rng);

impl SeededEntropy {
    pub fn new(seed: &[u8]) -> Result<Self> {
        if seed.len() > 32 {
            return Err(Error::InvalidArgument(format!(
                "seed has {} bytes, at most 32 allowed",
                seed.len()
            )));
        }
        let mut key = [0u8; 32];
        key[..seed.len()].copy_from_slice(seed);
        Ok(Self(ChaCha20Rng::from_seed(key)))
    }
}

impl EntropySource for SeededEntropy {
    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.0.fill_bytes(buf);
        Ok(())
    }
}

/// Textual entropy selector: `os`, `file:<path>` or `seed:<hex>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntropySpec {
    Os,
    File(PathBuf),
    Seed(Vec<u8>),
}

impl EntropySpec {
    pub fn open(&self) -> Result<Box<dyn EntropySource>> {
        Ok(match self {
            EntropySpec::Os => Box::new(OsEntropy),
            EntropySpec::File(path) => Box::new(ReaderEntropy::open(path)?),
            EntropySpec::Seed(seed) => Box::new(SeededEntropy::new(seed)?),
        })
    }
}

impl FromStr for EntropySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "os" {
            return Ok(EntropySpec::Os);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::Parse("empty entropy file path".into()));
            }
            return Ok(EntropySpec::File(PathBuf::from(path)));
        }
        if let Some(h) = s.strip_prefix("seed:") {
            let seed = hex::decode(h).map_err(|e| Error::Parse(format!("seed {h:?}: {e}")))?;
            if seed.is_empty() || seed.len() > 32 {
                return Err(Error::Parse(format!(
                    "seed must be 1 to 32 bytes of hex, got {}",
                    seed.len()
                )));
            }
            return Ok(EntropySpec::Seed(seed));
        }
        Err(Error::Parse(format!(
            "entropy {s:?} is not one of os, file:<path>, seed:<hex>"
        )))
    }
}

impl fmt::Display for EntropySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropySpec::Os => f.write_str("os"),
            EntropySpec::File(p) => write!(f, "file:{}", p.display()),
            EntropySpec::Seed(s) => write!(f, "seed:{}", hex::encode(s)),
        }
    }
}

/// A residue uniform on `[0, p)` from the smallest byte group covering `p`.
pub fn uniform_residue(src: &mut dyn EntropySource, p: u64) -> Result<u64> {
    if p == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let width = (64 - (p - 1).leading_zeros() as usize).div_ceil(8);
    let width = width.max(1);
    let space = 1u128 << (8 * width);
    let bound = space - space % p as u128;
    let mut buf = [0u8; 8];
    for _ in 0..REJECTION_LIMIT {
        src.fill(&mut buf[..width])?;
        let v = buf[..width]
            .iter()
            .fold(0u128, |acc, &b| (acc << 8) | b as u128);
        if v < bound {
            return Ok((v % p as u128) as u64);
        }
    }
    Err(Error::RejectionLimit(REJECTION_LIMIT))
}

/// A field element uniform over the whole field.
pub fn uniform_element(field: &FieldSpec, src: &mut dyn EntropySource) -> Result<FieldElement> {
    let p = field.characteristic();
    let coeffs = (0..field.degree())
        .map(|_| uniform_residue(src, p))
        .collect::<Result<Vec<_>>>()?;
    field.element(&coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `γ` restricted to nonzero zero-trace elements and `R = 0` discarded.
    Strict,
    /// Any nonzero `γ`, every output kept.
    Relaxed,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "relaxed" => Ok(Mode::Relaxed),
            _ => Err(Error::Parse(format!("mode {s:?} is not strict or relaxed"))),
        }
    }
}

/// Field, base degree, secret `u` and mode of a generator.
#[derive(Clone, Debug)]
pub struct PrngConfig {
    field: FieldSpec,
    u: FieldElement,
    mode: Mode,
    classes: TraceClassIndex,
}

impl PrngConfig {
    /// The base is GF(p^s); the extension degree `m/s` must be at least 2.
    pub fn new(field: &FieldSpec, s: usize, u: FieldElement, mode: Mode) -> Result<Self> {
        if !u.field().same_field(field) {
            return Err(Error::FieldMismatch);
        }
        if u.is_zero() {
            return Err(Error::ZeroParameter);
        }
        let r = field.check_divisor(s)?;
        if r < 2 {
            return Err(Error::InvalidArgument(format!(
                "extension degree over the base is {r}, need at least 2"
            )));
        }
        Ok(Self {
            field: field.clone(),
            u,
            mode,
            classes: TraceClassIndex::canonical(field, s)?,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn u(&self) -> &FieldElement {
        &self.u
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn base_degree(&self) -> usize {
        self.classes.base_degree()
    }

    /// Size q of the base field, which is also the number of output values.
    pub fn base_order(&self) -> u64 {
        self.classes.len() as u64
    }

    /// Table index of `Tr_q(u/γ)`; on a prime base this is the residue.
    pub fn output_for(&self, gamma: &FieldElement) -> Result<u64> {
        let x = self.u.try_div(gamma)?;
        Ok(self.classes.class_of(&x) as u64)
    }

    fn has_zero_trace(&self, x: &FieldElement) -> bool {
        self.classes.class_of(x) == 0
    }
}

/// Draws `γ`: nonzero with zero trace in strict mode, any nonzero element
/// in relaxed mode.
pub fn sample_gamma(config: &PrngConfig, src: &mut dyn EntropySource) -> Result<FieldElement> {
    for _ in 0..REJECTION_LIMIT {
        let x = uniform_element(&config.field, src)?;
        if x.is_zero() {
            continue;
        }
        if config.mode == Mode::Strict && !config.has_zero_trace(&x) {
            continue;
        }
        return Ok(x);
    }
    Err(Error::RejectionLimit(REJECTION_LIMIT))
}

/// One output `R`. In strict mode a zero output is discarded and a fresh
/// `γ` drawn.
pub fn next_value(config: &PrngConfig, src: &mut dyn EntropySource) -> Result<u64> {
    for _ in 0..REJECTION_LIMIT {
        let gamma = sample_gamma(config, src)?;
        let r = config.output_for(&gamma)?;
        if config.mode == Mode::Strict && r == 0 {
            continue;
        }
        return Ok(r);
    }
    Err(Error::RejectionLimit(REJECTION_LIMIT))
}

/// A generator bound to its entropy source.
pub struct PrngStream {
    config: PrngConfig,
    source: Box<dyn EntropySource>,
}

impl PrngStream {
    pub fn new(config: PrngConfig, source: Box<dyn EntropySource>) -> Self {
        Self { config, source }
    }

    pub fn config(&self) -> &PrngConfig {
        &self.config
    }

    pub fn next_value(&mut self) -> Result<u64> {
        next_value(&self.config, self.source.as_mut())
    }

    pub fn take_values(&mut self, n: usize) -> Result<Vec<u64>> {
        (0..n).map(|_| self.next_value()).collect()
    }
}

impl fmt::Debug for PrngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrngStream")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

/// Counts of `Tr_q(u/γ)` by table index over every nonzero zero-trace `γ`.
pub fn exhaustive_output_counts(field: &FieldSpec, u: &FieldElement, s: usize) -> Result<Vec<u64>> {
    let config = PrngConfig::new(field, s, u.clone(), Mode::Strict)?;
    let q = config.base_order() as usize;
    let counts = (1..field.order())
        .into_par_iter()
        .fold(
            || vec![0u64; q],
            |mut acc, i| {
                let g = field.from_index(i);
                if config.has_zero_trace(&g) {
                    let r = config.output_for(&g).expect("gamma is nonzero");
                    acc[r as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; q],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// `Q = 2μw + 1` prime, with μ ≥ 1 minimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RangeReduction {
    pub w: u64,
    pub mu: u64,
    pub q: u64,
}

pub fn find_range_prime(w: u64) -> Result<RangeReduction> {
    if w < 2 {
        return Err(Error::InvalidArgument(format!(
            "width {w} must be at least 2"
        )));
    }
    for mu in 1..=MU_LIMIT {
        let q = match mu.checked_mul(2 * w).and_then(|x| x.checked_add(1)) {
            Some(q) => q,
            None => break,
        };
        if is_prime(q) {
            return Ok(RangeReduction { w, mu, q });
        }
    }
    Err(Error::SearchLimitExceeded { w, limit: MU_LIMIT })
}

/// `S = R mod w` for `R` in `[1, Q-1]`.
pub fn reduce_to_width(r: u64, reduction: &RangeReduction) -> Result<u64> {
    if r == 0 || r >= reduction.q {
        return Err(Error::OutOfDomain {
            value: r,
            lo: 1,
            hi: reduction.q - 1,
        });
    }
    Ok(r % reduction.w)
}

/// The first monic irreducible quadratic over GF(q), scanning the
/// coefficients `(c0, c1)` with `c0` fastest.
pub fn quadratic_extension(q: u64) -> Result<FieldSpec> {
    for c1 in 0..q {
        for c0 in 1..q {
            match FieldSpec::new(q, 2, &[c0, c1, 1]) {
                Ok(f) => return Ok(f),
                Err(Error::ReducibleModulus { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::ReducibleModulus { p: q })
}

/// Outputs in `[0, w-1]`: a strict generator on GF(Q^2) over GF(Q) followed
/// by reduction mod w. The secret `u` is drawn from the source itself.
pub struct ReducedStream {
    reduction: RangeReduction,
    inner: PrngStream,
}

impl ReducedStream {
    pub fn new(w: u64, mut source: Box<dyn EntropySource>) -> Result<Self> {
        let reduction = find_range_prime(w)?;
        let field = quadratic_extension(reduction.q)?;
        let u = (0..REJECTION_LIMIT)
            .map(|_| uniform_element(&field, source.as_mut()))
            .find(|x| !matches!(x, Ok(e) if e.is_zero()))
            .ok_or(Error::RejectionLimit(REJECTION_LIMIT))??;
        let config = PrngConfig::new(&field, 1, u, Mode::Strict)?;
        Ok(Self {
            reduction,
            inner: PrngStream::new(config, source),
        })
    }

    pub fn reduction(&self) -> &RangeReduction {
        &self.reduction
    }

    pub fn config(&self) -> &PrngConfig {
        self.inner.config()
    }

    pub fn next_value(&mut self) -> Result<u64> {
        let r = self.inner.next_value()?;
        reduce_to_width(r, &self.reduction)
    }

    pub fn take_values(&mut self, n: usize) -> Result<Vec<u64>> {
        (0..n).map(|_| self.next_value()).collect()
    }
}

impl fmt::Debug for ReducedStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedStream")
            .field("reduction", &self.reduction)
            .field("inner", &self.inner)
            .finish()
    }
}

/// A bijection from a contiguous integer range onto an ordered target set.
///
/// [`Mapping::psi`] covers `{0, …, w-1}` for reduced outputs and
/// [`Mapping::phi`] covers `{1, …, q-1}` for raw strict outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping<T> {
    first: u64,
    items: Vec<T>,
}

impl<T: PartialEq> Mapping<T> {
    pub fn psi(w: u64, items: Vec<T>) -> Result<Self> {
        Self::build(0, w, items)
    }

    pub fn phi(q: u64, items: Vec<T>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("q = {q} is too small")));
        }
        Self::build(1, q - 1, items)
    }

    fn build(first: u64, len: u64, items: Vec<T>) -> Result<Self> {
        if items.len() as u64 != len {
            return Err(Error::SizeMismatch {
                expected: len as usize,
                found: items.len(),
            });
        }
        if items.is_empty() {
            return Err(Error::InvalidArgument("target set is empty".into()));
        }
        for (i, x) in items.iter().enumerate() {
            if items[..i].contains(x) {
                return Err(Error::InvalidArgument(format!(
                    "target entry {i} repeats an earlier entry"
                )));
            }
        }
        Ok(Self { first, items })
    }

    pub fn apply(&self, x: u64) -> Result<&T> {
        x.checked_sub(self.first)
            .and_then(|i| self.items.get(i as usize))
            .ok_or(Error::OutOfDomain {
                value: x,
                lo: self.first,
                hi: self.first + self.items.len() as u64 - 1,
            })
    }

    pub fn index_of(&self, item: &T) -> Option<u64> {
        self.items
            .iter()
            .position(|x| x == item)
            .map(|i| i as u64 + self.first)
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }
}

/// `Ψ(S)`: the S-th entry of a target list of length `w`.
pub fn apply_mapping<T: PartialEq>(s: u64, w: u64, target: &[T]) -> Result<&T> {
    if target.len() as u64 != w {
        return Err(Error::SizeMismatch {
            expected: w as usize,
            found: target.len(),
        });
    }
    target.get(s as usize).ok_or(Error::OutOfDomain {
        value: s,
        lo: 0,
        hi: w.saturating_sub(1),
    })
}

/// Upper `significance` quantile of chi-square with `dof` degrees of
/// freedom, by the Wilson–Hilferty cube approximation.
pub fn chi_square_quantile(dof: u64, significance: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be positive".into(),
        ));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance {significance} must lie in (0, 1)"
        )));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(significance);
    let k = dof as f64;
    let c = 2.0 / (9.0 * k);
    Ok(k * (1.0 - c + z * c.sqrt()).powi(3))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    /// Value of the first bin; bin `i` holds the value `min + i`.
    pub min: u64,
    pub counts: Vec<u64>,
    pub statistic: f64,
    pub dof: u64,
    pub significance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Pearson chi-square of `samples` against the uniform law on
/// `min..min + bins`.
pub fn audit_uniformity(
    samples: &[u64],
    bins: usize,
    min: u64,
    significance: f64,
) -> Result<AuditReport> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let needed = 10 * bins;
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            found: samples.len(),
        });
    }
    let hi = min + bins as u64 - 1;
    let mut counts = vec![0u64; bins];
    for &v in samples {
        if v < min || v > hi {
            return Err(Error::OutOfDomain {
                value: v,
                lo: min,
                hi,
            });
        }
        counts[(v - min) as usize] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = bins as u64 - 1;
    let threshold = chi_square_quantile(dof, significance)?;
    Ok(AuditReport {
        samples: samples.len(),
        min,
        counts,
        statistic,
        dof,
        significance,
        threshold,
        pass: statistic < threshold,
    })
}
