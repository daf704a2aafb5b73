use thiserror::Error;

/// Every failure the library can report.
///
/// Variants fall into three groups: malformed or invalid input, math-level
/// conditions that indicate an arithmetic bug (`NonIntegerCollapse`,
/// `NonRealResult`), and entropy/search exhaustion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("modulus is reducible over GF({p})")]
    ReducibleModulus { p: u64 },
    #[error("modulus must be monic of degree {expected} ({found} coefficients given)")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("coefficient {value} is out of range for GF({p})")]
    CoefficientOutOfRange { value: u64, p: u64 },
    #[error("field order {p}^{m} exceeds the supported size")]
    FieldTooLarge { p: u64, m: usize },
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("subfield degree {s} does not divide extension degree {m}")]
    NonDivisorDegree { s: usize, m: usize },
    #[error("no primitive element found (invalid field specification)")]
    NoPrimitiveFound,
    #[error("parameter u must be nonzero")]
    ZeroParameter,
    #[error("{0} requires a prime base (s = 1)")]
    PrimeBaseOnly(&'static str),
    #[error("{0} requires a proper subfield base (s < m)")]
    ProperSubfieldOnly(&'static str),
    #[error("cyclotomic assembly did not collapse to an integer: {0}")]
    NonIntegerCollapse(String),
    #[error("character sum has imaginary part {0:e}")]
    NonRealResult(f64),
    #[error("entropy source exhausted")]
    EntropyExhausted,
    #[error("entropy source failure: {0}")]
    EntropyFailure(String),
    #[error("rejection sampling exceeded {0} attempts")]
    RejectionLimit(u64),
    #[error("no prime of the form 2*mu*{w}+1 with mu <= {limit}")]
    SearchLimitExceeded { w: u64, limit: u64 },
    #[error("value {value} is outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: u64, lo: u64, hi: u64 },
    #[error("target set has {found} entries, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("need at least {needed} samples, got {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable variant name, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPrimeCharacteristic(_) => "NonPrimeCharacteristic",
            Error::ReducibleModulus { .. } => "ReducibleModulus",
            Error::DegreeMismatch { .. } => "DegreeMismatch",
            Error::CoefficientOutOfRange { .. } => "CoefficientOutOfRange",
            Error::FieldTooLarge { .. } => "FieldTooLarge",
            Error::FieldMismatch => "FieldMismatch",
            Error::ZeroInverse => "ZeroInverse",
            Error::NonDivisorDegree { .. } => "NonDivisorDegree",
            Error::NoPrimitiveFound => "NoPrimitiveFound",
            Error::ZeroParameter => "ZeroParameter",
            Error::PrimeBaseOnly(_) => "PrimeBaseOnly",
            Error::ProperSubfieldOnly(_) => "ProperSubfieldOnly",
            Error::NonIntegerCollapse(_) => "NonIntegerCollapse",
            Error::NonRealResult(_) => "NonRealResult",
            Error::EntropyExhausted => "EntropyExhausted",
            Error::EntropyFailure(_) => "EntropyFailure",
            Error::RejectionLimit(_) => "RejectionLimit",
            Error::SearchLimitExceeded { .. } => "SearchLimitExceeded",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
