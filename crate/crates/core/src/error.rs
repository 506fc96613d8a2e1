//! Crate-wide error taxonomy.
//!
//! Every fallible operation reports one of these variants; the CLI maps them to
//! exit codes (domain errors -> 1, malformed input -> 2).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Inversion of zero in a residue field or unit group.
    #[error("DivisionByZero: {0}")]
    DivisionByZero(String),

    /// Mixed operands from two different residue fields.
    #[error("FieldMismatch: {0}")]
    FieldMismatch(String),

    /// Mixed operands from two different tower configurations.
    #[error("ConfigMismatch: {0}")]
    ConfigMismatch(String),

    /// A result has no reliable digits, or a minimum is ambiguous at the
    /// working precision.  Raised instead of guessing.
    #[error("PrecisionExhausted: {0}")]
    PrecisionExhausted(String),

    /// Parameters outside the supported desk-scale range.
    #[error("UnsupportedConfig: {0}")]
    UnsupportedConfig(String),

    /// A construction-time parameter check failed (non-prime p, reducible
    /// modulus, non-Eisenstein polynomial, ...).
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    /// Sequence too short for the requested recurrence window.
    #[error("WindowTooShort: {0}")]
    WindowTooShort(String),

    /// A recurrence operation that steps forward requires d_r != 0 (backward:
    /// d_0 != 0).
    #[error("LeadingCoefficientZero: {0}")]
    LeadingCoefficientZero(String),

    /// No linear dependence within the requested order bound.
    #[error("NoDependenceFound: {0}")]
    NoDependenceFound(String),

    /// A negative-valuation digit sits outside the allowed index set.
    #[error("SupportViolation: {0}")]
    SupportViolation(String),

    /// Degenerate input (e.g. a Newton polygon with fewer than two finite
    /// points, or a zero leading coefficient).
    #[error("DegenerateInput: {0}")]
    DegenerateInput(String),

    /// Malformed input file or literal.
    #[error("ParseError: {0}")]
    Parse(String),
}

impl Error {
    /// CLI exit code for this error: 2 for parse errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            _ => 1,
        }
    }

    /// Prefixes the message with the input location (file, flag) that fed the
    /// failing operation, preserving the variant.
    pub fn at_input(self, location: &str) -> Error {
        let tag = |msg: String| format!("{location}: {msg}");
        match self {
            Error::DivisionByZero(m) => Error::DivisionByZero(tag(m)),
            Error::FieldMismatch(m) => Error::FieldMismatch(tag(m)),
            Error::ConfigMismatch(m) => Error::ConfigMismatch(tag(m)),
            Error::PrecisionExhausted(m) => Error::PrecisionExhausted(tag(m)),
            Error::UnsupportedConfig(m) => Error::UnsupportedConfig(tag(m)),
            Error::InvalidConfig(m) => Error::InvalidConfig(tag(m)),
            Error::WindowTooShort(m) => Error::WindowTooShort(tag(m)),
            Error::LeadingCoefficientZero(m) => Error::LeadingCoefficientZero(tag(m)),
            Error::NoDependenceFound(m) => Error::NoDependenceFound(tag(m)),
            Error::SupportViolation(m) => Error::SupportViolation(tag(m)),
            Error::DegenerateInput(m) => Error::DegenerateInput(tag(m)),
            Error::Parse(m) => Error::Parse(tag(m)),
        }
    }
}
