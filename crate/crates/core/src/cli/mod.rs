//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation or I/O error.

pub mod config;
pub mod output;
pub mod run;

use std::ffi::OsString;

use clap::Parser;
use serde_json::Value;

pub use config::{Cli, FileConfig, Grid, Mode, OutputFormat, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(crate::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "computation error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

pub fn version() -> String {
    format!("lqme {}", env!("CARGO_PKG_VERSION"))
}

pub fn meta(config: &RunConfig) -> Value {
    serde_json::json!({ "version": version(), "config": config.to_json() })
}

/// Computes and writes the configured table.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let table = run::build_table(config).map_err(CliError::Compute)?;
    let text = output::render(&table, &meta(config), config.output_format);
    output::write_output(config.output_path.as_deref(), &text).map_err(CliError::Io)
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let print_only = cli.print_config;
    let result = RunConfig::resolve(cli).and_then(|config| {
        if print_only {
            let mut text = serde_json::to_string_pretty(&meta(&config)).expect("json renders");
            text.push('\n');
            output::write_output(None, &text).map_err(CliError::Io)
        } else {
            execute(&config)
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lqme: {e}");
            e.exit_code()
        }
    }
}
