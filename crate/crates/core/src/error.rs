use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called outside its numeric domain. `op` names the
    /// failing operation (e.g. `path_loss`, `margin`) so the CLI can report
    /// which step of the chain rejected its input.
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A scenario or deployment configuration is invalid. `field` is the
    /// dotted path of the offending entry.
    #[error("config `{field}`: {msg}")]
    Config { field: String, msg: String },
}

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
