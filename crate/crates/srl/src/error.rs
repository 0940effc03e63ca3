use srl_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("convergence: {0}")]
    Convergence(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("format: {0}")]
    Format(String),
}

impl CliError {
    /// 2 configuration or input, 3 convergence, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Convergence(_) => 3,
            CliError::Verification(_) => 4,
            _ => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoConvergence { .. } | CoreError::EllipticityLoss { .. } | CoreError::ShockConditionDiverged => {
                CliError::Convergence(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
