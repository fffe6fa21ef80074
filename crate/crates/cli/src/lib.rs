//! Command-line front end for `pab-core`.
//!
//! Every failure is reported as one line on stderr,
//! `pab: error stage=<stage> kind=<kind> message=<text>`, and maps to an exit
//! code by kind: 2 parse, 3 validation, 4 numeric, 5 I/O.

pub mod args;
pub mod commands;
pub mod model;

use std::fmt;

use pab_core::{Error, ErrorKind};

pub use args::{Cli, Command};

#[derive(Debug)]
pub struct CliError {
    /// Pipeline stage that failed, e.g. `input`, `fit`, `output`.
    pub stage: &'static str,
    pub error: Error,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.error.kind())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.error.kind() {
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Io => "io",
        };
        let message = self.error.to_string().replace(['\n', '\r'], " ");
        write!(f, "pab: error stage={} kind={kind} message={message}", self.stage)
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Parse => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numeric => 4,
        ErrorKind::Io => 5,
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::FitKinetics(a) => commands::fit_kinetics(a).map(drop),
        Command::FitExp(a) => commands::fit_exp(a).map(drop),
        Command::FitGp(a) => commands::fit_gp(a).map(drop),
        Command::Predict(a) => commands::predict(a).map(drop),
        Command::Report(a) => commands::report(a).map(drop),
        Command::Synth(a) => commands::synth(a).map(drop),
    }
}
