use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid law `{spec}`: {message}")]
    LawSpec { spec: String, message: String },
    #[error("invalid expression `{expr}`: {message}")]
    Expression { expr: String, message: String },
    #[error("scenario `{name}`: {message}")]
    Scenario { name: String, message: String },
    #[error(transparent)]
    Core(#[from] ordersense_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
