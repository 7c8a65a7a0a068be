use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("graph is disconnected (second-smallest signed-Laplacian eigenvalue {lambda2:e})")]
    Disconnected { lambda2: f64 },

    #[error("Newton solver did not converge after {iterations} iterations (last Newton step {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bound is not contractive: a = {a} >= 1")]
    NotContractive { a: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
