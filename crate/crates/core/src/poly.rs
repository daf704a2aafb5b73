//! Dense polynomials over GF(p), constant term first, kept trimmed (the zero
//! polynomial is the empty vector). Only what modulus validation and
//! inversion need.

use crate::arith::{inv_mod_prime, mul_mod};

pub(crate) type Poly = Vec<u64>;

pub(crate) fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder of `a` by nonzero `b`.
pub(crate) fn div_rem(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = inv_mod_prime(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = mul_mod(*r.last().unwrap(), lead_inv, p);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            let t = mul_mod(c, bj, p);
            r[shift + j] = (r[shift + j] + p - t) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Poly {
    div_rem(a, b, p).1
}

pub(crate) fn mul_rem(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Poly {
    rem(&mul(a, b, p), f, p)
}

pub(crate) fn pow_rem(base: &[u64], mut exp: u64, f: &[u64], p: u64) -> Poly {
    let mut acc: Poly = rem(&[1], f, p);
    let mut b = rem(base, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_rem(&acc, &b, f, p);
        }
        b = mul_rem(&b, &b, f, p);
        exp >>= 1;
    }
    acc
}

/// Monic gcd.
pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(x, p)
}

fn make_monic(a: Poly, p: u64) -> Poly {
    match a.last() {
        None => a,
        Some(&lead) => {
            let inv = inv_mod_prime(lead, p);
            a.into_iter().map(|c| mul_mod(c, inv, p)).collect()
        }
    }
}

/// Inverse of `a` modulo `f` via the extended Euclidean algorithm.
pub(crate) fn inv_rem(a: &[u64], f: &[u64], p: u64) -> Option<Poly> {
    let (mut r0, mut r1) = (trim(f.to_vec()), rem(a, f, p));
    let (mut s0, mut s1): (Poly, Poly) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = div_rem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = inv_mod_prime(r0[0], p);
    Some(rem(
        &s0.into_iter().map(|x| mul_mod(x, c, p)).collect::<Vec<_>>(),
        f,
        p,
    ))
}

/// Irreducibility of the monic `f` over GF(p): no factor of degree k <= deg/2,
/// i.e. gcd(f, x^(p^k) - x) = 1 for each such k.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    let m = f.len().saturating_sub(1);
    if m == 0 {
        return false;
    }
    let x: Poly = vec![0, 1];
    let mut frob = rem(&x, &f, p);
    for _ in 1..=m / 2 {
        frob = pow_rem(&frob, p, &f, p);
        let g = gcd(&f, &sub(&frob, &x, p), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}
