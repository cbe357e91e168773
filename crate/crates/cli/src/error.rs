use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}{}: {message}", Location(*line), KeyLabel(key))]
    Config { line: Option<usize>, key: String, message: String },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: boostprobe_core::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

struct Location(Option<usize>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, " at line {line}"),
            None => Ok(()),
        }
    }
}

struct KeyLabel<'a>(&'a str);

impl fmt::Display for KeyLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            Ok(())
        } else {
            write!(f, " ({})", self.0)
        }
    }
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Validation(_) => 2,
            CliError::Numerical { source, .. } => match source {
                // parameter errors that slipped past config validation are still input errors
                boostprobe_core::Error::InvalidParameter(_)
                | boostprobe_core::Error::InvalidBasis(_)
                | boostprobe_core::Error::DimensionOverflow { .. }
                | boostprobe_core::Error::FillingMismatch { .. } => 2,
                _ => 3,
            },
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(boostprobe_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}
