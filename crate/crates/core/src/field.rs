//! Arithmetic in GF(p^m) over a single polynomial basis.
//!
//! A [`FieldSpec`] owns the validated modulus and a few lazily built caches
//! (trace forms, a primitive element). [`FieldElement`]s carry a cheap handle
//! to their field so that mixing elements of different fields is caught.
//!
//! Elements are enumerated by their integer index `c_0 + c_1 p + ... +
//! c_{m-1} p^{m-1}`: the constant term varies fastest and the leading
//! coefficient is the most significant digit.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::arith::{checked_pow, distinct_prime_factors, is_prime_trial, mul_mod};
use crate::error::{Error, Result};
use crate::poly;

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 32;

/// A validated finite field GF(p^m) = GF(p)[x] / (modulus).
#[derive(Clone)]
pub struct FieldSpec(Arc<FieldInner>);

struct FieldInner {
    p: u64,
    m: usize,
    order: u64,
    modulus: Vec<u64>,
    primitive_modulus: bool,
    // Tr_p(x^i) for each basis monomial.
    trace_form: Vec<u64>,
    // Indexed by s: images Tr_{p^s}(x^i) of the basis, built on first use.
    rel_trace_forms: Vec<OnceLock<Vec<Vec<u32>>>>,
    primitive: OnceLock<Option<Vec<u32>>>,
}

impl FieldSpec {
    /// Validates `p` (trial division), the shape of `modulus` and its
    /// irreducibility.
    ///
    /// `modulus` lists coefficients constant term first and must have length
    /// `m + 1` with leading coefficient 1.
    pub fn new(p: u64, m: usize, modulus: &[u64]) -> Result<Self> {
        if !is_prime_trial(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if m == 0 || modulus.len() != m + 1 || modulus[m] != 1 {
            return Err(Error::DegreeMismatch {
                expected: m,
                found: modulus.len(),
            });
        }
        if let Some(&bad) = modulus.iter().find(|&&c| c >= p) {
            return Err(Error::CoefficientOutOfRange { value: bad, p });
        }
        let order = match checked_pow(p, m) {
            Some(q) if q <= MAX_FIELD_ORDER => q,
            _ => return Err(Error::FieldTooLarge { p, m }),
        };
        if !poly::is_irreducible(modulus, p) {
            return Err(Error::ReducibleModulus { p });
        }
        let primitive_modulus = root_is_primitive(p, modulus, order);

        let mut spec = FieldSpec(Arc::new(FieldInner {
            p,
            m,
            order,
            modulus: modulus.to_vec(),
            primitive_modulus,
            trace_form: Vec::new(),
            rel_trace_forms: (0..=m).map(|_| OnceLock::new()).collect(),
            primitive: OnceLock::new(),
        }));
        // The linear trace form comes from the Frobenius definition applied
        // to the basis monomials.
        let trace_form = (0..m)
            .map(|i| spec.monomial(i).trace_abs_by_frobenius())
            .collect();
        Arc::get_mut(&mut spec.0)
            .expect("no outstanding handles during construction")
            .trace_form = trace_form;
        Ok(spec)
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.m
    }

    /// q = p^m.
    pub fn order(&self) -> u64 {
        self.0.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    /// Whether the class of `x` generates the multiplicative group. Not
    /// required by anything in this crate; reported for information.
    pub fn is_primitive_modulus(&self) -> bool {
        self.0.primitive_modulus
    }

    /// Same field as `other`: the same handle or an identical (p, modulus).
    pub fn same_field(&self, other: &FieldSpec) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }

    /// `r = m / s`, or `NonDivisorDegree`.
    pub fn check_divisor(&self, s: usize) -> Result<usize> {
        if s == 0 || !self.0.m.is_multiple_of(s) {
            return Err(Error::NonDivisorDegree { s, m: self.0.m });
        }
        Ok(self.0.m / s)
    }

    /// Order of the subfield GF(p^s).
    pub fn subfield_order(&self, s: usize) -> Result<u64> {
        self.check_divisor(s)?;
        Ok(self.0.p.pow(s as u32))
    }

    fn wrap(&self, coeffs: Vec<u32>) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(vec![0; self.0.m])
    }

    pub fn one(&self) -> FieldElement {
        self.constant(1)
    }

    /// The prime-field constant `c mod p`.
    pub fn constant(&self, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.0.m];
        coeffs[0] = (c % self.0.p) as u32;
        self.wrap(coeffs)
    }

    /// `x^i` reduced by the modulus.
    pub fn monomial(&self, i: usize) -> FieldElement {
        let mut e = vec![0u64; i + 1];
        e[i] = 1;
        let r = poly::rem(&e, &self.0.modulus, self.0.p);
        self.wrap_poly(&r)
    }

    /// The class of `x`, i.e. a root of the modulus.
    pub fn root(&self) -> FieldElement {
        self.monomial(1)
    }

    /// Element from coefficients (constant term first). Missing high
    /// coefficients are zero.
    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.0.m {
            return Err(Error::DegreeMismatch {
                expected: self.0.m,
                found: coeffs.len(),
            });
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= self.0.p) {
            return Err(Error::CoefficientOutOfRange {
                value: bad,
                p: self.0.p,
            });
        }
        let mut v: Vec<u32> = coeffs.iter().map(|&c| c as u32).collect();
        v.resize(self.0.m, 0);
        Ok(self.wrap(v))
    }

    fn wrap_poly(&self, r: &[u64]) -> FieldElement {
        let mut v = vec![0u32; self.0.m];
        for (slot, &c) in v.iter_mut().zip(r) {
            *slot = c as u32;
        }
        self.wrap(v)
    }

    /// Element with the given enumeration index.
    pub fn from_index(&self, mut index: u64) -> FieldElement {
        debug_assert!(index < self.0.order);
        let p = self.0.p;
        let coeffs = (0..self.0.m)
            .map(|_| {
                let c = (index % p) as u32;
                index /= p;
                c
            })
            .collect();
        self.wrap(coeffs)
    }

    /// All q elements in enumeration order, zero first.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.order).map(move |i| self.from_index(i))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.0.order).map(move |i| self.from_index(i))
    }

    /// First element in enumeration order that generates GF(q)*.
    pub fn primitive_element(&self) -> Result<FieldElement> {
        let found = self.0.primitive.get_or_init(|| {
            let n = self.0.order - 1;
            let factors = distinct_prime_factors(n);
            self.nonzero_elements()
                .find(|g| factors.iter().all(|&r| !g.pow(n / r).is_one()))
                .map(|g| g.coeffs)
        });
        found
            .clone()
            .map(|c| self.wrap(c))
            .ok_or(Error::NoPrimitiveFound)
    }

    /// GF(p^s) inside this field, listed as 0 followed by powers of a
    /// generator of its multiplicative group.
    pub fn subfield_view(&self, s: usize) -> Result<SubfieldView> {
        self.check_divisor(s)?;
        let sub_order = self.0.p.pow(s as u32);
        let g = self.primitive_element()?;
        let generator = g.pow((self.0.order - 1) / (sub_order - 1));
        let mut elements = Vec::with_capacity(sub_order as usize);
        elements.push(self.zero());
        let mut cur = self.one();
        for _ in 0..sub_order - 1 {
            elements.push(cur.clone());
            cur = &cur * &generator;
        }
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.to_index(), i))
            .collect::<HashMap<_, _>>();
        if lookup.len() != elements.len() {
            return Err(Error::NoPrimitiveFound);
        }
        Ok(SubfieldView {
            s,
            generator,
            elements,
            lookup,
        })
    }

    fn rel_trace_form(&self, s: usize) -> &[Vec<u32>] {
        self.0.rel_trace_forms[s].get_or_init(|| {
            (0..self.0.m)
                .map(|i| self.monomial(i).trace_rel_by_frobenius(s).coeffs)
                .collect()
        })
    }

    fn mul_coeffs(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let (p, m) = (self.0.p, self.0.m);
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(x as u64, y as u64, p)) % p;
            }
        }
        let f = &self.0.modulus;
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..m {
                let t = mul_mod(c, f[j], p);
                prod[i - m + j] = (prod[i - m + j] + p - t) % p;
            }
        }
        prod.truncate(m);
        prod.into_iter().map(|c| c as u32).collect()
    }
}

fn root_is_primitive(p: u64, modulus: &[u64], order: u64) -> bool {
    let n = order - 1;
    let x = [0u64, 1];
    distinct_prime_factors(n)
        .into_iter()
        .all(|r| poly::pow_rem(&x, n / r, modulus, p) != vec![1])
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec({self})")
    }
}

/// The one-line text form `p=<int> m=<int> modulus=<c0,...,cm>`.
impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} m={} modulus={}",
            self.0.p,
            self.0.m,
            join_coeffs(self.0.modulus.iter())
        )
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut m = None;
        let mut modulus = None;
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, found `{token}`")))?;
            let slot_taken = match key {
                "p" => p.replace(parse_int(value)?).is_some(),
                "m" => m.replace(parse_int(value)? as usize).is_some(),
                "modulus" => modulus.replace(parse_coeff_list(value)?).is_some(),
                _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
            };
            if slot_taken {
                return Err(Error::Parse(format!("duplicate key `{key}`")));
            }
        }
        match (p, m, modulus) {
            (Some(p), Some(m), Some(modulus)) => FieldSpec::new(p, m, &modulus),
            _ => Err(Error::Parse("field spec needs p=, m= and modulus=".into())),
        }
    }
}

fn parse_int(s: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a non-negative integer")))
}

/// Parses `c0,c1,...` (no spaces, no empty entries).
pub fn parse_coeff_list(s: &str) -> Result<Vec<u64>> {
    if s.is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    s.split(',').map(parse_int).collect()
}

pub(crate) fn join_coeffs<T: fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// An element of a [`FieldSpec`], as coefficients in the polynomial basis.
#[derive(Clone)]
pub struct FieldElement {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Coefficients, constant term first; always exactly m of them.
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// The constant term when the element lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u64> {
        self.coeffs[1..]
            .iter()
            .all(|&c| c == 0)
            .then_some(self.coeffs[0] as u64)
    }

    /// Enumeration index of this element.
    pub fn to_index(&self) -> u64 {
        let p = self.field.0.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c as u64)
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.field.same_field(&other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let p = self.field.0.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| ((a as u64 + b as u64) % p) as u32)
            .collect();
        Ok(self.field.wrap(coeffs))
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let p = self.field.0.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| ((a as u64 + p - b as u64) % p) as u32)
            .collect();
        Ok(self.field.wrap(coeffs))
    }

    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self
            .field
            .wrap(self.field.mul_coeffs(&self.coeffs, &other.coeffs)))
    }

    pub fn try_div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        self.try_mul(&other.inv()?)
    }

    /// Multiplies by the prime-field scalar `c`.
    pub fn scale(&self, c: u64) -> FieldElement {
        let p = self.field.0.p;
        let c = c % p;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| mul_mod(a as u64, c, p) as u32)
            .collect();
        self.field.wrap(coeffs)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let p = self.field.0.p;
        let a: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        let r = poly::inv_rem(&a, &self.field.0.modulus, p)
            .expect("nonzero element is invertible modulo an irreducible polynomial");
        Ok(self.field.wrap_poly(&r))
    }

    /// `self^e` by square-and-multiply, with `0^0 = 1`.
    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `self^p`.
    pub fn frobenius(&self) -> FieldElement {
        self.pow(self.field.0.p)
    }

    /// The conjugates `self^(w^i)`, `i = 0..count`, for `w = p^s`.
    fn conjugates(&self, s: usize, count: usize) -> impl Iterator<Item = FieldElement> + '_ {
        let w = self.field.0.p.pow(s as u32);
        std::iter::successors(Some(self.clone()), move |c| Some(c.pow(w))).take(count)
    }

    /// Absolute trace into GF(p), returned as a residue in `[0, p)`.
    pub fn trace_abs(&self) -> u64 {
        let p = self.field.0.p;
        self.coeffs
            .iter()
            .zip(&self.field.0.trace_form)
            .fold(0u64, |acc, (&c, &t)| (acc + mul_mod(c as u64, t, p)) % p)
    }

    /// Absolute trace as the literal sum of Frobenius conjugates.
    ///
    /// Panics if the sum leaves the prime field, which can only happen on an
    /// arithmetic bug.
    pub fn trace_abs_by_frobenius(&self) -> u64 {
        let m = self.field.0.m;
        let sum = self
            .conjugates(1, m)
            .fold(self.field.zero(), |acc, c| &acc + &c);
        sum.as_prime_field()
            .unwrap_or_else(|| panic!("absolute trace left the prime field: {sum:?}"))
    }

    /// Relative trace onto GF(p^s): the sum of `self^(q^i)` for `i < m/s`,
    /// `q = p^s`.
    pub fn trace_rel(&self, s: usize) -> Result<FieldElement> {
        self.field.check_divisor(s)?;
        let p = self.field.0.p;
        let form = self.field.rel_trace_form(s);
        let mut acc = vec![0u64; self.field.0.m];
        for (&c, image) in self.coeffs.iter().zip(form) {
            if c == 0 {
                continue;
            }
            for (slot, &v) in acc.iter_mut().zip(image) {
                *slot = (*slot + mul_mod(c as u64, v as u64, p)) % p;
            }
        }
        Ok(self.field.wrap(acc.into_iter().map(|c| c as u32).collect()))
    }

    /// Relative trace as the literal sum of conjugates.
    pub fn trace_rel_by_frobenius(&self, s: usize) -> FieldElement {
        let r = self.field.0.m / s;
        self.conjugates(s, r)
            .fold(self.field.zero(), |acc, c| &acc + &c)
    }

    /// Absolute norm into GF(p): the product of all Frobenius conjugates.
    pub fn norm_abs(&self) -> u64 {
        let m = self.field.0.m;
        let prod = self
            .conjugates(1, m)
            .fold(self.field.one(), |acc, c| &acc * &c);
        prod.as_prime_field()
            .unwrap_or_else(|| panic!("absolute norm left the prime field: {prod:?}"))
    }

    /// Relative norm onto GF(p^s).
    pub fn norm_rel(&self, s: usize) -> Result<FieldElement> {
        let r = self.field.check_divisor(s)?;
        Ok(self
            .conjugates(s, r)
            .fold(self.field.one(), |acc, c| &acc * &c))
    }

    /// Norm from the subfield GF(p^s) down to GF(p), for an element already
    /// known to lie in GF(p^s).
    pub fn subfield_norm_to_prime(&self, s: usize) -> Result<u64> {
        self.field.check_divisor(s)?;
        let prod = self
            .conjugates(1, s)
            .fold(self.field.one(), |acc, c| &acc * &c);
        prod.as_prime_field().ok_or_else(|| {
            Error::InvalidArgument(format!("element {self} does not lie in GF(p^{s})"))
        })
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.field.same_field(&other.field)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement[{self}]")
    }
}

/// Comma-separated coefficients, constant term first.
impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_coeffs(self.coeffs.iter()))
    }
}

// Operator forms panic on mismatched fields; use the `try_*` methods to get
// `FieldMismatch` instead.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs)
                    .expect(concat!("FieldElement::", stringify!($method)))
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let p = self.field.0.p;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| ((p - c as u64) % p) as u32)
            .collect();
        self.field.wrap(coeffs)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

/// GF(p^s) embedded in GF(p^m), in canonical order: zero, then `g^0, g^1, ...`
/// for the generator `g`.
#[derive(Clone, Debug)]
pub struct SubfieldView {
    s: usize,
    generator: FieldElement,
    elements: Vec<FieldElement>,
    lookup: HashMap<u64, usize>,
}

impl SubfieldView {
    pub fn degree(&self) -> usize {
        self.s
    }

    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Position of `e` in the canonical order, if it lies in the subfield.
    pub fn index_of(&self, e: &FieldElement) -> Option<usize> {
        self.lookup.get(&e.to_index()).copied()
    }
}
