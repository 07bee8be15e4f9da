use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("degenerate bound: {0}")]
    Degenerate(mpmcrb::Error),
    #[error(transparent)]
    Core(#[from] mpmcrb::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn field(path: &str, message: impl Into<String>) -> Self {
        Self::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for a degenerate single-point bound, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Degenerate(_) => 2,
            _ => 1,
        }
    }
}
