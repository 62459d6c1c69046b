use thiserror::Error;

/// Errors raised by the numerical kernels, the series engine and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func} at {detail}")]
    Overflow { func: &'static str, detail: String },

    #[error("{func} did not converge after {terms} terms (last increment {last_increment:e})")]
    Convergence {
        func: &'static str,
        terms: usize,
        last_increment: f64,
    },

    #[error(
        "series truncation failed at index cap {index_cap}: shell contribution {last_increment:e} \
         vs running sum {value:e}"
    )]
    Truncation {
        index_cap: usize,
        terms: usize,
        last_increment: f64,
        value: f64,
    },

    #[error("correlation matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invalid correlation: {0}")]
    Correlation(String),

    #[error("Green fit did not converge: residual history {history:?}")]
    GreenFit { history: Vec<f64> },

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("simulation infeasible: {0}")]
    SimulationInfeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for errors that come from a series or iteration running out of budget.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Truncation { .. } | Error::GreenFit { .. }
        )
    }
}
