use thiserror::Error;

/// Errors raised by the analysis kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular correlation: |mu_{port}| = 1 makes 1 - mu^2 vanish")]
    SingularCorrelation { port: usize },

    #[error("exact evaluator supports at most {cap} ports (got {n_ports}); use the integral bound or Monte Carlo")]
    ExactCapExceeded { n_ports: usize, cap: usize },

    #[error("alternating sum lost {lost_digits:.1} decimal digits (limit {limit}); use the integral bound instead")]
    PrecisionLoss { lost_digits: f64, limit: f64 },

    #[error("resolution exceeded: target {target} is below every |J0| peak up to the table cap {cap}")]
    ResolutionExceeded { target: f64, cap: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (last change {change:e} at {nodes} nodes)")]
    NoConvergence {
        tolerance: f64,
        change: f64,
        nodes: usize,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, FamaError>;
