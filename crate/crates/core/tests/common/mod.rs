#![allow(dead_code)]

use tracepart::prng::{uniform_element, EntropySource, SeededEntropy};
use tracepart::{FieldElement, FieldSpec};

/// GF(3^5), modulus x^5 + 2x^3 + 2x^2 + x + 1, u = 2η³ + η.
pub fn f35() -> (FieldSpec, FieldElement) {
    let f = FieldSpec::new(3, 5, &[1, 1, 2, 2, 0, 1]).unwrap();
    let u = f.element(&[0, 1, 0, 2, 0]).unwrap();
    (f, u)
}

/// GF(5^5), modulus x^5 + 4x^4 + 3x^3 + x^2 + 2x + 3, u = θ³ + 2θ² + 3θ.
pub fn f55() -> (FieldSpec, FieldElement) {
    let f = FieldSpec::new(5, 5, &[3, 2, 1, 3, 4, 1]).unwrap();
    let u = f.element(&[0, 3, 2, 1, 0]).unwrap();
    (f, u)
}

/// GF(2^8) viewed as GF(4^4), modulus x^8 + x^7 + x^3 + x^2 + 1,
/// u = x^7 + x^2.
pub fn f44() -> (FieldSpec, FieldElement) {
    let f = FieldSpec::new(2, 8, &[1, 0, 1, 1, 0, 0, 0, 1, 1]).unwrap();
    let u = f.element(&[0, 0, 1, 0, 0, 0, 0, 1]).unwrap();
    (f, u)
}

pub fn f53() -> FieldSpec {
    FieldSpec::new(5, 3, &[2, 3, 0, 1]).unwrap()
}

/// x^3 + x + 1 has no root in GF(7).
pub fn f73() -> FieldSpec {
    FieldSpec::new(7, 3, &[1, 1, 0, 1]).unwrap()
}

pub fn rng(seed: u8) -> SeededEntropy {
    SeededEntropy::new(&[seed, 0x5a]).unwrap()
}

pub fn random_nonzero(field: &FieldSpec, src: &mut dyn EntropySource) -> FieldElement {
    loop {
        let x = uniform_element(field, src).unwrap();
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_element(field: &FieldSpec, src: &mut dyn EntropySource) -> FieldElement {
    uniform_element(field, src).unwrap()
}
