use thiserror::Error;

/// Errors raised anywhere in the reconciliation stack.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no prime found in [{lo}, {hi}]")]
    NoPrimeFound { lo: u64, hi: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be odd prime")]
    ModulusNotOddPrime,
    #[error("{value} is a quadratic residue mod {q}")]
    NotNonResidue { value: u64, q: u64 },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("leading coefficient zero")]
    LeadingCoefficientZero,
    #[error("out of range: {value} >= {bound}")]
    OutOfRange { value: u128, bound: u128 },

    #[error("undefined on zero")]
    UndefinedOnZero,
    #[error("chunk too wide: {0} bits")]
    ChunkTooWide(u32),
    #[error("null bucket")]
    NullBucket,

    #[error("symbol out of field")]
    SymbolOutOfField,
    #[error("value out of range")]
    ValueOutOfRange,
    #[error("uncorrectable")]
    Uncorrectable,

    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parameter overflow: {0}")]
    ParameterOverflow(String),
    #[error("inconsistent cell at index {0}")]
    InconsistentCell(usize),

    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated")]
    Truncated,
    #[error("checksum mismatch")]
    ChecksumMismatch,
    #[error("malformed message: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
