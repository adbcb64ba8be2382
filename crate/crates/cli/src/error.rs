use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: bslab::Error,
    },

    #[error("io failure at {path}: {message}")]
    Io { path: String, message: String },
}

pub(crate) fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid { field: field.to_string(), message: message.into() }
}

/// Attaches a short description of the step that failed to a core error.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for bslab::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: what.to_string(), source })
    }
}
