use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] green_premium::Error),

    #[error("{0}")]
    Input(String),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for problems with what the user supplied, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use green_premium::Error as E;
        match self {
            CliError::Model(E::ZeroDenominator(_) | E::Degenerate(_) | E::Io(_)) => 2,
            CliError::Model(_) | CliError::Input(_) => 1,
            CliError::Output(_) | CliError::Csv(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
