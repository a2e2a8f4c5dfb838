//! File formats, configuration and command-line driver for the climber
//! simulator in `climber-core`.

use std::ops::Range;
use std::path::PathBuf;

pub mod cli;
pub mod config;
pub mod export;
pub mod optimize;
pub mod script;
pub mod sweep;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or invalid configuration; `path` names the file or key.
    #[error("{path}: {reason}")]
    Config { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] climber_core::SimError),
    #[error("{0}")]
    Format(String),
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { path: path.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Appends `line:column` of `span` within `text` to a config error path.
    pub fn with_span(self, text: &str, span: Option<Range<usize>>) -> Self {
        match (self, span) {
            (Error::Config { path, reason }, Some(span)) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                Error::Config { path: format!("{path}:{line}:{col}"), reason }
            }
            (e, _) => e,
        }
    }

    /// 2 for configuration and usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
