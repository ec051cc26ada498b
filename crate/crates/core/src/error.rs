use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A market parameter violates one of the model invariants.
    #[error("invalid parameter `{field}`: {rule}")]
    InvalidParams { field: String, rule: String },

    /// An argument lies outside the domain of the operation (e.g. a price outside the box).
    #[error("domain error: {0}")]
    Domain(String),

    /// The equilibrium linear system is singular or has a nonpositive determinant.
    #[error("singular equilibrium system (determinant {det})")]
    Singular { det: f64 },

    /// The requested quantity is only defined in a parameter regime that does not hold.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// A regularizer or schedule cannot be used as configured.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A search exceeded its iteration guard.
    #[error("search for `{what}` exceeded horizon guard {guard}")]
    Overflow { what: String, guard: u64 },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::InvalidParams {
            field: field.into(),
            rule: rule.into(),
        }
    }
}
