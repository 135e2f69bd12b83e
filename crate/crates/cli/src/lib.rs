//! Command-line front end for [`fockbell`].
//!
//! Every run is described by a [`RunConfig`]. [`dispatch`] validates it,
//! computes a [`Report`] and renders the report as CSV, JSON or SVG.

mod commands;
pub mod config;
pub mod error;
mod selfcheck;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fockbell::bell::SweepRow;
use serde_json::{json, Map, Value};

pub use config::{Command, Format, RunConfig};
pub use error::{CliError, CliResult};
pub use table::{Cell, Table};

/// Named pass/fail verdict attached to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Everything a command produced, before rendering.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
    pub sweep: Option<Vec<SweepRow>>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self, command: Command) -> Value {
        let mut outputs = self.outputs.clone();
        if let Some(t) = &self.table {
            outputs.insert("rows".into(), t.to_json());
        }
        json!({
            "command": command.name(),
            "inputs": self.inputs,
            "outputs": outputs,
            "checks": self
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
                .collect::<Vec<_>>(),
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// Runs one command and returns the report without writing anything.
pub fn execute(run: &RunConfig) -> CliResult<Report> {
    commands::validate_flags(run)?;
    commands::execute(run)
}

/// Renders a report in the requested format.
pub fn render(run: &RunConfig, report: &Report) -> CliResult<Vec<u8>> {
    match run.format() {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report.to_json(run.command)).expect("json values serialize");
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => match &report.table {
            Some(t) => Ok(t.to_csv()?),
            None => error::usage(format!("{} has no tabular output", run.command.name())),
        },
        Format::Svg => match &report.sweep {
            Some(rows) => Ok(svg::render(rows, run.log_x).into_bytes()),
            None => error::usage("--format svg is only available for figure1"),
        },
    }
}

/// Validates, executes and writes the artifact. Returns whether every
/// attached check passed.
pub fn dispatch(run: &RunConfig) -> CliResult<bool> {
    let report = execute(run)?;
    let text_lines = run.command == Command::SelfCheck && run.format.is_none();
    let bytes = if text_lines {
        selfcheck::lines(&report).into_bytes()
    } else {
        render(run, &report)?
    };
    match &run.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(report.all_passed())
}

/// Entry point shared by the binary: parses arguments, dispatches and maps
/// the result onto an exit status. Failures are reported on stderr as a
/// single JSON record.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let run = match RunConfig::try_parse_from(args) {
        Ok(run) => run,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.trim().trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(msg.to_string()).record(None));
            return ExitCode::from(2);
        }
    };
    match dispatch(&run) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if run.command == Command::SelfCheck => ExitCode::FAILURE,
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record(Some(run.command.name())));
            ExitCode::from(2)
        }
    }
}
