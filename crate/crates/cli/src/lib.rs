//! Command-line front end: argument model, file formats and commands.
//!
//! Exit codes: 0 success, 2 invalid input (flags, files, parameters, unwritable
//! output), 3 a computation failed a numerical check or hit an internal error.

pub mod commands;
pub mod io;

use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// A failed command together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<io::FormatError> for Failure {
    fn from(e: io::FormatError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<cfrht::Error> for Failure {
    fn from(e: cfrht::Error) -> Self {
        use cfrht::Error::*;
        match e {
            TruncationLeak { .. } | SeriesOverflow { .. } | ConventionCheck(_) => Failure::numeric(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}
