use thiserror::Error;

/// Errors raised by the tail library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {name} = {value} ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An aggregate specification or configuration failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested formula does not apply to this specification.
    #[error("wrong regime: {0}")]
    WrongRegime(String),

    /// The radial model belongs to the wrong max-domain of attraction.
    #[error("unsupported max-domain class: {0}")]
    UnsupportedClass(String),

    /// A valid input combination that is deliberately not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, constraint: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        constraint,
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(domain(name, value, "must be positive and finite"))
    }
}
