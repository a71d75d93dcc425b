use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("vector norm is {0}, expected 1")]
    BadNorm(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("function undefined at eigenvalue {0:.6e}")]
    UndefinedFunction(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("parameter `{name}` = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("Kraus operators are not trace preserving (residual {0:.3e})")]
    IncompleteChannel(f64),

    #[error("discord {0:.3e} is below the clamp tolerance; the optimizer likely failed")]
    InconsistentDiscord(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
