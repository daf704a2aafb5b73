//! Additive characters and Kloosterman sums, computed exactly.
//!
//! `K(a, b) = Σ_{α ≠ 0} ζ_p^{Tr(aα + b/α)}` is obtained by counting how many
//! α give each trace value and folding the counts into a [`CyclotomicInt`].
//! Floating-point values are only ever derived from the exact form.

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rayon::prelude::*;

use crate::cyclotomic::{CycloScalar, CyclotomicInt};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Largest imaginary part tolerated when a character sum is evaluated.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// `c_t = #{α ∈ GF(q)* : Tr(aα + b/α) = t}` for `t = 0..p`.
pub fn char_counts(field: &FieldSpec, a: &FieldElement, b: &FieldElement) -> Result<Vec<u64>> {
    if !a.field().same_field(field) || !b.field().same_field(field) {
        return Err(Error::FieldMismatch);
    }
    let p = field.characteristic() as usize;
    let counts = (1..field.order())
        .into_par_iter()
        .fold(
            || vec![0u64; p],
            |mut acc, i| {
                let alpha = field.from_index(i);
                let inv = alpha.inv().expect("alpha is nonzero");
                let t = (&(a * &alpha) + &(b * &inv)).trace_abs();
                acc[t as usize] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; p],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(l, r)| *l += r);
                x
            },
        );
    Ok(counts)
}

/// `K(χ_p, a, b)` as an exact cyclotomic integer.
pub fn kloosterman_exact<T: CycloScalar>(
    field: &FieldSpec,
    a: &FieldElement,
    b: &FieldElement,
) -> Result<CyclotomicInt<T>> {
    Ok(CyclotomicInt::from_counts(&char_counts(field, a, b)?))
}

/// Real value of an exact character sum; `NonRealResult` when the imaginary
/// part exceeds [`REAL_TOLERANCE`].
pub fn real_value<T: CycloScalar>(z: &CyclotomicInt<T>) -> Result<f64> {
    let v: Complex<f64> = z.evaluate();
    if v.im.abs() >= REAL_TOLERANCE {
        return Err(Error::NonRealResult(v.im));
    }
    Ok(v.re)
}

pub fn kloosterman_real(field: &FieldSpec, a: &FieldElement, b: &FieldElement) -> Result<f64> {
    real_value(&kloosterman_exact::<i64>(field, a, b)?)
}

/// `K(χ_o, c) = Σ_{ℓ=1}^{p-1} ζ_p^{ℓ + c/ℓ}` over the prime field GF(p).
pub fn prime_char_kloosterman<T: CycloScalar>(p: u64, c: u64) -> CyclotomicInt<T> {
    let c = c % p;
    let mut counts = vec![0u64; p as usize];
    for l in 1..p {
        let inv = crate::arith::inv_mod_prime(l, p);
        let t = (l + crate::arith::mul_mod(c, inv, p)) % p;
        counts[t as usize] += 1;
    }
    CyclotomicInt::from_counts(&counts)
}

pub fn prime_char_kloosterman_real(p: u64, c: u64) -> Result<f64> {
    real_value(&prime_char_kloosterman::<i64>(p, c))
}

/// One value `K(χ_p, t·u)` of a spectrum.
#[derive(Clone, Debug)]
pub struct SpectrumEntry<T, F> {
    pub t: u64,
    pub counts: Vec<u64>,
    pub exact: CyclotomicInt<T>,
    pub value: F,
}

/// The sums `K(χ_p, t·u)`, `t = 1..p-1`, for a fixed nonzero `u`.
#[derive(Clone, Debug)]
pub struct KloostermanSpectrum<T, F> {
    field: FieldSpec,
    u: FieldElement,
    entries: Vec<SpectrumEntry<T, F>>,
}

impl<T: CycloScalar, F: Float + FloatConst> KloostermanSpectrum<T, F> {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn u(&self) -> &FieldElement {
        &self.u
    }

    pub fn entries(&self) -> &[SpectrumEntry<T, F>] {
        &self.entries
    }

    /// `K(χ_p, t·u)` for `t` taken mod p; `t ≡ 0` is the degenerate value -1.
    pub fn exact(&self, t: u64) -> CyclotomicInt<T> {
        let p = self.field.characteristic();
        match t % p {
            0 => CyclotomicInt::from_int(p as usize, -T::one()),
            t => self.entries[(t - 1) as usize].exact.clone(),
        }
    }

    /// `Σ_{t=1}^{p-1} K(χ_p, t·u)`.
    pub fn sum_exact(&self) -> CyclotomicInt<T> {
        let p = self.field.characteristic() as usize;
        self.entries
            .iter()
            .fold(CyclotomicInt::zero(p), |acc, e| &acc + &e.exact)
    }

    /// `2√q`.
    pub fn weil_bound(&self) -> F {
        F::from(2.0 * (self.field.order() as f64).sqrt()).unwrap()
    }

    /// The first `t` whose value violates `|K| < 2√q`, if any.
    pub fn weil_violation(&self) -> Option<u64> {
        let bound = self.weil_bound();
        self.entries
            .iter()
            .find(|e| e.value.abs() >= bound)
            .map(|e| e.t)
    }

    /// CSV with header `t,c_0,...,c_{p-1},real_value`; the counts are the raw
    /// trace-value counts behind each sum.
    pub fn to_csv(&self) -> String
    where
        F: std::fmt::Display,
    {
        let p = self.field.characteristic();
        let mut out = String::from("t");
        for t in 0..p {
            out.push_str(&format!(",c_{t}"));
        }
        out.push_str(",real_value\n");
        for e in &self.entries {
            out.push_str(&e.t.to_string());
            for c in &e.counts {
                out.push_str(&format!(",{c}"));
            }
            out.push_str(&format!(",{:.9}\n", e.value));
        }
        out
    }
}

/// Precomputes `K(χ_p, t·u)` for `t = 1..p-1`.
pub fn spectrum<T: CycloScalar, F: Float + FloatConst>(
    field: &FieldSpec,
    u: &FieldElement,
) -> Result<KloostermanSpectrum<T, F>> {
    if !u.field().same_field(field) {
        return Err(Error::FieldMismatch);
    }
    if u.is_zero() {
        return Err(Error::ZeroParameter);
    }
    let one = field.one();
    let entries = (1..field.characteristic())
        .map(|t| {
            let counts = char_counts(field, &one, &u.scale(t))?;
            let exact = CyclotomicInt::<T>::from_counts(&counts);
            let value = F::from(real_value(&exact)?).unwrap();
            Ok(SpectrumEntry {
                t,
                counts,
                exact,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KloostermanSpectrum {
        field: field.clone(),
        u: u.clone(),
        entries,
    })
}
