use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {point} is outside the support {support}")]
    OutOfSupport { point: f64, support: &'static str },

    #[error(
        "HPD search did not converge after {iterations} iterations \
         (target mass {target}, reached {achieved}, interval [{lower}, {upper}])"
    )]
    HpdNonConvergence {
        iterations: usize,
        target: f64,
        achieved: f64,
        lower: f64,
        upper: f64,
    },

    #[error("design m = {m} is outside the feasible set {{0, ..., {max}}}")]
    InfeasibleDesign { m: usize, max: usize },

    #[error("budget of {budget_quadrants} quadrant equivalents does not admit a single quadrant")]
    EmptyFeasibleSet { budget_quadrants: f64 },

    #[error("dimension mismatch: expected {expected} classes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("campaign data line {line}: {reason}")]
    Data { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
