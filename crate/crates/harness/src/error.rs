use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] qary_cs::Error),
}

impl HarnessError {
    /// Process exit code: 2 for spec problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::InvalidSpec(_) => 2,
            HarnessError::Io(_) => 3,
            HarnessError::Core(e) => match e {
                qary_cs::Error::Io(_) | qary_cs::Error::Format(_) => 3,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
