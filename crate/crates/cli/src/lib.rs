//! Batch front-end for the `torus-spine` experiments.
//!
//! Every subcommand writes a JSON report `{config, results, bounds, meta}`
//! (or a CSV table where one exists). Exit codes: 0 when every asserted bound
//! passes, 1 on a bound or verification failure, 2 on a usage error.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};
use report::{Meta, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] torus_spine::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use torus_spine::Error as E;
        match self {
            CliError::Core(
                E::VerificationFailed { .. } | E::CoverageFailed { .. } | E::NotSaturated { .. },
            ) => EXIT_FAILURE,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand, writes the
/// report and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> Result<i32, CliError> {
    let out = command.output().clone();
    let name = command.name();
    let started = Instant::now();
    let outcome = match command {
        Command::Constants(a) => commands::constants_cmd(a)?,
        Command::Sweep(a) => commands::sweep_cmd(a)?,
        Command::SpineEdge(a) => commands::spine_edge_cmd(a)?,
        Command::SpineVertex(a) => commands::spine_vertex_cmd(a)?,
        Command::Verify(a) => commands::verify_cmd(a)?,
        Command::BruteMin(a) => commands::brute_min_cmd(a)?,
        Command::FlowCert(a) => commands::flow_cert_cmd(a)?,
        Command::Continuous(a) => commands::continuous_cmd(a)?,
    };
    let elapsed = started.elapsed().as_secs_f64();
    let (timestamp_unix, wall_clock_seconds) = if out.no_timestamp {
        (None, None)
    } else {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        (Some(now), Some(elapsed))
    };
    let report = Report {
        config: outcome.config,
        results: outcome.results,
        bounds: outcome.bounds,
        meta: Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: name,
            prng: commands::prng_name(),
            timestamp_unix,
            wall_clock_seconds,
        },
    };
    let bytes = match out.format {
        Format::Json => report::render_json(&report)?,
        Format::Csv => match &outcome.table {
            Some(table) => report::render_csv(table)?,
            None => {
                return Err(CliError::Usage(format!(
                    "{name} has no table output; use --format json"
                )))
            }
        },
    };
    let path = out
        .output
        .clone()
        .unwrap_or_else(|| report::default_path(name, out.format));
    report::write_output(&path, &bytes)?;
    let failed: Vec<&str> = report
        .bounds
        .iter()
        .filter(|b| b.asserted && !b.pass)
        .map(|b| b.source)
        .collect();
    if path.as_os_str() != "-" {
        eprintln!("{name}: wrote {}", path.display());
    }
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{name}: failed checks: {}", failed.join(", "));
        Ok(EXIT_FAILURE)
    }
}
