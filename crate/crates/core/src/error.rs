use thiserror::Error;

/// Errors raised by model construction and the numerical solvers.
#[derive(Debug, Error)]
pub enum QwbError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("degenerate steady state: null space dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("null vector is traceless (|tr| = {0:.3e})")]
    TracelessNullVector(f64),

    #[error("time evolution did not reach the tolerance by t = {time}: residual {residual:.3e}")]
    NotConverged { time: f64, residual: f64 },

    #[error("iterative solve stalled after {iterations} iterations: residual {residual:.3e}")]
    IterativeSolve { iterations: usize, residual: f64 },

    #[error("couplings cannot balance: acos argument {0} outside [-1, 1]")]
    FluxBalance(f64),

    #[error("Markov chain is disconnected or has no unique stationary state")]
    DisconnectedChain,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("linear algebra: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl QwbError {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        QwbError::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    /// Short stable token used in CSV error columns.
    pub fn code(&self) -> &'static str {
        match self {
            QwbError::Dimension(_) => "dimension",
            QwbError::InvalidParameter { .. } => "invalid_parameter",
            QwbError::NonHermitian(_) => "non_hermitian",
            QwbError::DegenerateSteadyState(_) => "degenerate_steady_state",
            QwbError::TracelessNullVector(_) => "traceless_null_vector",
            QwbError::NotConverged { .. } => "not_converged",
            QwbError::IterativeSolve { .. } => "iterative_solve",
            QwbError::FluxBalance(_) => "flux_balance",
            QwbError::DisconnectedChain => "disconnected_chain",
            QwbError::Fit(_) => "fit",
            QwbError::Linalg(_) => "linalg",
        }
    }
}

pub type Result<T> = std::result::Result<T, QwbError>;
