use emkahler::{CohomologyError, ExprError, GeometryError};
use thiserror::Error;

/// Problems with the scenario itself or the files around it. All map to
/// exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Failure while evaluating a check, as opposed to a check that ran and
/// did not pass.
#[derive(Debug, Error)]
pub enum CheckError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
