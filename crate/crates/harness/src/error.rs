use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Configuration parsing or validation failure; exits with code 1.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] psld_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Core(e) => match e {
                psld_core::Error::InvalidParams(_)
                | psld_core::Error::Grid(_)
                | psld_core::Error::Scheme(_)
                | psld_core::Error::ShapeMismatch(_) => 1,
                _ => 2,
            },
            _ => 2,
        }
    }
}
