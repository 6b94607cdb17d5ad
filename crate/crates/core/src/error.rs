use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("malformed number at offset {0}")]
    BadNumber(usize),
    #[error("expected '{0}' at token offset {1}")]
    Expected(char, usize),
    #[error("unexpected end of expression (offset {0})")]
    UnexpectedEnd(usize),
    #[error("trailing input after token {0}")]
    Trailing(usize),
    #[error("unknown identifier '{0}' at offset {1}")]
    UnknownIdent(String, usize),
    #[error("exponent must be a small integer (offset {0})")]
    IntegerExponent(usize),
    #[error("|z| must be raised to an even power to stay smooth (offset {0})")]
    OddModulusPower(usize),
    #[error("modulus bars must enclose z1 or z2 (offset {0})")]
    ModulusTarget(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("metric is not positive definite at {point:?}")]
    DegenerateMetric { point: [f64; 4] },
    #[error("point {point:?} is outside the domain of the chart")]
    OutOfDomain { point: [f64; 4] },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid geometry parameters: {0}")]
    InvalidParameters(String),
    #[error("scalar curvature is not constant (max |s - mean| = {spread:e})")]
    NonConstantScalar { spread: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomologyError {
    #[error("class has {got} coordinates but the lattice has rank {rank}")]
    DimensionMismatch { rank: usize, got: usize },
    #[error("pairing matrix is not symmetric")]
    AsymmetricPairing,
    #[error("Kodaira fibrations need base and fiber genus >= 2 (got p = {p}, q = {q})")]
    InvalidGenera { p: i64, q: i64 },
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("[omega]^2 must be positive, got {0}")]
    NonPositiveVolume(String),
    #[error("bound {kind} needs {what}")]
    MissingInput { kind: &'static str, what: &'static str },
    #[error("identity failed: {0}")]
    IdentityViolated(String),
}
