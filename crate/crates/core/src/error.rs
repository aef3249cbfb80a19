use thiserror::Error;

/// Failure modes shared by every module.
///
/// The CLI maps these onto its exit-code taxonomy via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Input { field: String, reason: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn input(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Input {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input { .. } | Error::Io { .. } => 1,
            Error::Resource(_) => 2,
            Error::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
