use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error(transparent)]
    Core(#[from] dagbandit::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
