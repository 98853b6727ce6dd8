use thiserror::Error;

use crate::symbolic::Var;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot invert `{expr}` while substituting for {var}")]
    NonInvertibleSubstitution { var: Var, expr: String },

    #[error("negative exponent of t in `{0}`")]
    NegativeTExponent(String),

    #[error("negative exponent of {var} without a Laurent flag")]
    NegativeExponentNotPermitted { var: Var },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fields live on different charts ({0} vs {1})")]
    ChartMismatch(String, String),

    #[error("field is not regular on chart {chart}: {reason}")]
    NotChartRegular { chart: String, reason: String },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("structure constant table: {0}")]
    Table(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("polynomial involves chart coordinate {0}; only auxiliary parameters are allowed")]
    NotParameterPolynomial(Var),

    #[error("fundamental fields disagree across charts for generator e{0}")]
    ChartDisagreement(usize),

    #[error("order-0 field E'{0} is not in the span of the global fields at t = 0")]
    NotInGlobalSpan(usize),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
