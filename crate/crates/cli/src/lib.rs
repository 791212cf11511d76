//! Batch workflows behind the `psas` binary: simulate a scan, image it,
//! map ray-path counts, and tabulate image metrics across algorithms and
//! reference dielectrics.

pub mod commands;
pub mod config;

use std::fmt;

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags, config or input paths; exit code 2.
    Usage,
    /// The model failed on valid input; exit code 1.
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Usage, message: e.to_string() }
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Runtime, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Runtime => 1,
        }
    }

    /// Single-line JSON for stderr.
    pub fn json_line(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Usage => "usage",
            ErrorKind::Runtime => "runtime",
        };
        serde_json::json!({ "error": kind, "exit_code": self.exit_code(), "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<psas::Error> for CliError {
    fn from(e: psas::Error) -> Self {
        Self::runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e)
    }
}
