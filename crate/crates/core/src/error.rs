use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate model: output variance is zero")]
    DegenerateModel,

    #[error("too many inputs for subset enumeration: {k} (max {max})")]
    TooManyInputs { k: usize, max: usize },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("model evaluation failed at row {row}: {message} (input {input:?})")]
    Evaluation {
        row: usize,
        input: Vec<f64>,
        message: String,
    },

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
