use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("auxiliary momenta sum to {residual:e}, expected 0")]
    AuxiliarySumNonzero { residual: f64 },

    #[error("budget exceeded: {what} ({requested} > cap {cap})")]
    BudgetExceeded {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("partition is not even: lump {lump} has {left} left and {right} right labels")]
    NotEven {
        lump: usize,
        left: usize,
        right: usize,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("bad split: {0}")]
    BadSplit(String),

    #[error("geometric bound diverges: 2k*lambda^gamma = {ratio} >= 1")]
    DivergentBound { ratio: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("energy {energy} outside table range [0, {max}]")]
    OutOfTable { energy: f64, max: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("frequencies {i} and {j} are closer than {tol:e}")]
    DegenerateFrequencies { i: usize, j: usize, tol: f64 },

    #[error("kappa = {kappa} is not below 2/(6+9d) = {limit}")]
    KappaTooLarge { kappa: f64, limit: f64 },

    #[error("insufficient samples: relative error {achieved:e} exceeds {requested:e}")]
    InsufficientSamples { achieved: f64, requested: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("time step violates stability bound: {0}")]
    CflViolation(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}
