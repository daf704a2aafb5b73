//! Exact elements of Z[ζ_p] for a prime p.
//!
//! A value is stored as `p` integer coefficients of `1, ζ, ..., ζ^(p-1)`.
//! Because `1 + ζ + ... + ζ^(p-1) = 0`, the representation is not unique;
//! [`CyclotomicInt::reduce`] picks the normal form with `c_{p-1} = 0`.
//! Every constructor and arithmetic operation returns reduced values.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, PrimInt, Signed};

/// Integer coefficient types usable in [`CyclotomicInt`].
pub trait CycloScalar: PrimInt + Signed + fmt::Debug + fmt::Display + Send + Sync {}

impl<T: PrimInt + Signed + fmt::Debug + fmt::Display + Send + Sync> CycloScalar for T {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicInt<T> {
    coeffs: Vec<T>,
}

impl<T: CycloScalar> CyclotomicInt<T> {
    pub fn zero(p: usize) -> Self {
        assert!(p >= 2, "cyclotomic order must be at least 2");
        Self {
            coeffs: vec![T::zero(); p],
        }
    }

    /// The rational integer `n`.
    pub fn from_int(p: usize, n: T) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = n;
        z
    }

    /// `ζ^e` (exponent taken mod p).
    pub fn root_power(p: usize, e: i64) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[e.rem_euclid(p as i64) as usize] = T::one();
        z.reduce()
    }

    /// `Σ_t counts[t] ζ^t`.
    ///
    /// Panics if `counts` is empty or a count does not fit in `T`.
    pub fn from_counts(counts: &[u64]) -> Self {
        let coeffs = counts
            .iter()
            .map(|&c| T::from(c).expect("count fits the coefficient type"))
            .collect();
        Self::from_raw(coeffs)
    }

    /// Wraps unreduced coefficients (length = p) and reduces them.
    pub fn from_raw(coeffs: Vec<T>) -> Self {
        assert!(coeffs.len() >= 2, "cyclotomic order must be at least 2");
        Self { coeffs }.reduce()
    }

    /// The prime p.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients of the reduced form; the last one is always zero.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Normal form: subtracts `c_{p-1}` from every coefficient.
    pub fn reduce(mut self) -> Self {
        let top = *self.coeffs.last().unwrap();
        if !top.is_zero() {
            for c in &mut self.coeffs {
                *c = *c - top;
            }
        }
        self
    }

    /// True iff the value is a rational integer.
    pub fn is_rational(&self) -> bool {
        let p = self.coeffs.len();
        self.coeffs[1..p - 1].iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<T> {
        self.is_rational().then_some(self.coeffs[0])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * k).collect(),
        }
    }

    /// Exact division of every coefficient by `d`, or `None` when some
    /// coefficient leaves a remainder.
    pub fn checked_div_exact(&self, d: T) -> Option<Self> {
        if self.coeffs.iter().any(|&c| !(c % d).is_zero()) {
            return None;
        }
        Some(Self {
            coeffs: self.coeffs.iter().map(|&c| c / d).collect(),
        })
    }

    /// Image under the Galois automorphism `ζ ↦ ζ^k`, `k` coprime to p.
    pub fn galois(&self, k: usize) -> Self {
        let p = self.coeffs.len();
        assert!(
            !k.is_multiple_of(p),
            "automorphism exponent must be a unit mod p"
        );
        let mut out = vec![T::zero(); p];
        for (t, &c) in self.coeffs.iter().enumerate() {
            let slot = (t * k) % p;
            out[slot] = out[slot] + c;
        }
        Self::from_raw(out)
    }

    /// Complex conjugate, i.e. `ζ ↦ ζ^(-1)`.
    pub fn conj(&self) -> Self {
        self.galois(self.coeffs.len() - 1)
    }

    /// Evaluation at `ζ = exp(2πi/p)`.
    pub fn evaluate<F: Float + FloatConst>(&self) -> Complex<F> {
        let p = F::from(self.coeffs.len()).unwrap();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Complex::new(F::zero(), F::zero()), |acc, (t, &c)| {
                let theta = F::TAU() * F::from(t).unwrap() / p;
                acc + Complex::from_polar(F::one(), theta) * F::from(c).unwrap()
            })
    }

    fn assert_same_order(&self, other: &Self) {
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "cyclotomic values of different orders"
        );
    }
}

impl<T: CycloScalar> Add for &CyclotomicInt<T> {
    type Output = CyclotomicInt<T>;
    fn add(self, rhs: Self) -> CyclotomicInt<T> {
        self.assert_same_order(rhs);
        CyclotomicInt::from_raw(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }
}

impl<T: CycloScalar> Sub for &CyclotomicInt<T> {
    type Output = CyclotomicInt<T>;
    fn sub(self, rhs: Self) -> CyclotomicInt<T> {
        self.assert_same_order(rhs);
        CyclotomicInt::from_raw(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }
}

/// Cyclic convolution modulo `ζ^p = 1`.
impl<T: CycloScalar> Mul for &CyclotomicInt<T> {
    type Output = CyclotomicInt<T>;
    fn mul(self, rhs: Self) -> CyclotomicInt<T> {
        self.assert_same_order(rhs);
        let p = self.coeffs.len();
        let mut out = vec![T::zero(); p];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                let slot = (i + j) % p;
                out[slot] = out[slot] + a * b;
            }
        }
        CyclotomicInt::from_raw(out)
    }
}

impl<T: CycloScalar> Neg for &CyclotomicInt<T> {
    type Output = CyclotomicInt<T>;
    fn neg(self) -> CyclotomicInt<T> {
        CyclotomicInt {
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl<T: CycloScalar> $trait for CyclotomicInt<T> {
            type Output = CyclotomicInt<T>;
            fn $method(self, rhs: Self) -> CyclotomicInt<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<T: CycloScalar> std::iter::Sum for CyclotomicInt<T> {
    // Empty sums have no known order; callers fold from an explicit zero
    // when the iterator may be empty.
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.reduce(|a, b| &a + &b)
            .expect("sum of an empty sequence of cyclotomic integers")
    }
}

/// `c0 + c1*z + ... ` over the nonzero coefficients, e.g. `3 - 2*z^2`.
impl<T: CycloScalar> fmt::Display for CyclotomicInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c < T::zero() { "-" } else { "+" };
            if first {
                if c < T::zero() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match t {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}*z")?,
                _ => write!(f, "{mag}*z^{t}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
