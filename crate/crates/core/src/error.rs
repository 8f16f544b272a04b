use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the solvers and model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
    #[error("unsupported estimate {0}")]
    UnsupportedEstimate(String),
    #[error("empty input")]
    EmptyInput,
    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("incomplete catalog: no entry for {0}")]
    IncompleteCatalog(String),
    #[error("stale action: {0}")]
    StaleAction(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid hotlink: {0}")]
    InvalidHotlink(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

impl Error {
    /// True for outcomes where the model is well formed but admits no
    /// solution.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}
