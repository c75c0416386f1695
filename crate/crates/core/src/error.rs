use thiserror::Error;

/// Errors raised by the oracle, transfer and algorithm layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dim { expected: usize, found: usize },

    #[error("piecewise-max model has no pieces")]
    ModelEmpty,

    #[error("point with norm {norm} lies outside the domain ball of radius {limit}")]
    OutOfDomain { norm: f64, limit: f64 },

    #[error("separation accuracy {eta_c} exceeds the inner radius {rho}")]
    BadEta { eta_c: f64, rho: f64 },

    #[error("depth {delta} must be strictly below the inner radius {rho}")]
    BadDelta { delta: f64, rho: f64 },

    #[error("invalid arguments: {0}")]
    BadArgs(String),

    #[error("oracle accuracy {eta} exceeds the smooth-transfer limit {limit}")]
    EtaTooLarge { eta: f64, limit: f64 },

    #[error("exact one-dimensional smoothing requested in dimension {0}")]
    Exact1dInHighDim(usize),

    #[error("projection onto the feasible-point cone is zero and no fallback normal was supplied")]
    DegenerateCone,

    #[error("query {t} has norm {norm}, outside the algorithm ball of radius {radius}")]
    AlgorithmQueryOutOfBall { t: usize, norm: f64, radius: f64 },

    #[error("exchange budget of {budget} queries exhausted")]
    ExchangeBudget { budget: usize },

    #[error("numerical collapse: {0}")]
    NumericalCollapse(String),

    #[error("{needed} lattice points exceed the iteration budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("no query point was answered feasible")]
    NoFeasiblePoint,

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dim { expected, found })
    }
}
