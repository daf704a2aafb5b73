pub mod arith;
pub mod cyclotomic;
pub mod error;
pub mod field;
pub mod kloosterman;
pub mod partition;
mod poly;
pub mod prng;

pub use cyclotomic::{CycloScalar, CyclotomicInt};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec, SubfieldView};
pub use kloosterman::KloostermanSpectrum;
pub use partition::{BTable, Method, TraceClassIndex};
pub use prng::{EntropySpec, Mode, PrngConfig, PrngStream, ReducedStream};

/// Cyclotomic integers with `i64` coefficients, enough for any field this
/// crate accepts.
pub type Cyclotomic = CyclotomicInt<i64>;
/// Wide-coefficient variant.
pub type Cyclotomic128 = CyclotomicInt<i128>;
/// Spectrum with `i64` exact values and `f64` evaluations.
pub type Spectrum = KloostermanSpectrum<i64, f64>;
/// Spectrum evaluated in single precision.
pub type Spectrum32 = KloostermanSpectrum<i64, f32>;
