use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed for a matrix of order {order}")]
    Eigensolver { order: usize },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("initial relation violated at mu = {mu}: relative residual {residual:e}")]
    InitialRelation { mu: f64, residual: f64 },

    #[error("vanishing coefficient at index {index}: {what}")]
    VanishingCoefficient { index: usize, what: &'static str },

    #[error("z = {z} is within {distance:e} of the eigenvalue {eigenvalue}")]
    Pole {
        z: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("singular amplitude system at energy {energy}")]
    Singular { energy: f64 },

    #[error("declared parity {declared} violated: {detail}")]
    Parity {
        declared: &'static str,
        detail: String,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
