use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::CliError;

pub const OUT_DIR_ENV: &str = "TORUS_SPINE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "reports";

/// One numeric comparison. `asserted = false` marks values that are only
/// recorded and never affect the exit code.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub d: usize,
    pub value: f64,
    pub relation: &'static str,
    pub bound: f64,
    pub pass: bool,
    pub asserted: bool,
}

impl BoundCheck {
    pub fn le(source: &'static str, m: Option<usize>, d: usize, value: f64, bound: f64) -> Self {
        BoundCheck {
            source,
            m,
            d,
            value,
            relation: "<=",
            bound,
            pass: value <= bound,
            asserted: true,
        }
    }

    pub fn ge(source: &'static str, m: Option<usize>, d: usize, value: f64, bound: f64) -> Self {
        BoundCheck {
            relation: ">=",
            pass: value >= bound,
            ..BoundCheck::le(source, m, d, value, bound)
        }
    }

    pub fn eq(source: &'static str, m: Option<usize>, d: usize, value: f64, bound: f64) -> Self {
        BoundCheck {
            relation: "==",
            pass: value == bound,
            ..BoundCheck::le(source, m, d, value, bound)
        }
    }

    /// Overrides the comparison result, for checks decided exactly elsewhere.
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn recorded_only(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub prng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: Value,
    pub results: Value,
    pub bounds: Vec<BoundCheck>,
    pub meta: Meta,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass || !b.asserted)
    }
}

/// Rows for CSV output, with a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn default_path(subcommand: &str, format: Format) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    dir.join(format!("{subcommand}.{ext}"))
}

pub fn render_json(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn render_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })
}

/// Writes to stdout for `-`, else to the file, creating parent directories.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).map_err(io_err)?;
        return out.flush().map_err(io_err);
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    std::fs::write(path, bytes).map_err(io_err)
}
