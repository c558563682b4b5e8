use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible frequency: |xi| = {norm} exceeds {limit}")]
    InfeasibleFrequency { norm: f64, limit: f64 },

    #[error("energy {energy} is within {margin:e} of a Dirichlet eigenvalue (threshold {threshold:e})")]
    NearEigenvalue {
        energy: f64,
        margin: f64,
        threshold: f64,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("Neumann series did not converge after {iterations} iterations (contraction {contraction})")]
    NoConvergence { iterations: usize, contraction: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("singular symbol: {0}")]
    Singular(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
