use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("eigensolver failed: {0}")]
    Convergence(String),

    #[error("exponent (λi+λj)·tf = {exponent} exceeds the linear-domain cap {cap}")]
    Range { exponent: f64, cap: f64 },

    #[error("uncontrollable or ill-conditioned: min eigenvalue {min:e} of M vs max {max:e}")]
    Uncontrollable { min: f64, max: f64, m_eigs: Vec<f64> },

    #[error("condition number {cond:e} exceeds cap {cap:e}")]
    Conditioning { cond: f64, cap: f64 },

    #[error("matrix is singular; the inverse traces are undefined")]
    Singular,

    #[error("extended precision did not resolve the spectrum within {bits} bits")]
    Precision { bits: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}
