use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("integrand decays too slowly: order {order} - N*m = {decay} is not below -n = -{n}")]
    Decay {
        order: String,
        decay: String,
        n: usize,
    },
    #[error("quadrature supports dimensions 1 to 3, got {0}")]
    Dimension(usize),
    #[error("quadrature did not reach tolerance {tol:e} (last change {change:e})")]
    NonConvergence { tol: f64, change: f64 },
    #[error("lattice tail bound {bound:e} exceeds tolerance at radius {radius}")]
    TailBound { bound: f64, radius: usize },
    #[error("fit is ill-conditioned: condition estimate {condition:e} exceeds {threshold:e}")]
    IllConditioned { condition: f64, threshold: f64 },
    #[error("invalid ladder: {0}")]
    Ladder(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Core(#[from] tracecoef_core::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;
