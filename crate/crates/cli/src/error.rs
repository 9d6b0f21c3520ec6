use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(#[from] superres::Error),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(e) => match e {
                superres::Error::InvalidParameter(_) | superres::Error::DimensionMismatch { .. } => 2,
                superres::Error::Convergence { .. }
                | superres::Error::SingularMetric { .. }
                | superres::Error::Singularity { .. } => 3,
            },
            CliError::VerifyFailed(_) => 1,
        }
    }
}
