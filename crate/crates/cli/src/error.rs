use thiserror::Error;

/// Problems with the config or its referenced files; exit status 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("missing required keys: {0}")]
    MissingKeys(String),

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` repeats line {first}")]
    DuplicateKey { line: usize, first: usize, key: String },

    #[error("{}`{key}`: {reason}", line_prefix(*.line))]
    InvalidValue { line: usize, key: String, reason: String },

    #[error("{0}")]
    Io(String),
}

fn line_prefix(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}: ")
    }
}

/// Any failure of a run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    /// A numerical failure, tagged with the stage that raised it.
    #[error("{stage}: {source}")]
    Numeric {
        stage: &'static str,
        source: volterra_exec::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output { .. } => 2,
            Self::Numeric { .. } => 3,
        }
    }
}

/// Attaches a stage name to solver errors.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, RunError>;
}

impl<T> Stage<T> for volterra_exec::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Numeric { stage, source })
    }
}
