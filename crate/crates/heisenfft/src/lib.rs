//! Experiment runner for the `heisenfft-core` numerics: JSON configuration,
//! the five named scenarios, `report.json` and CSV output, and the HSNF
//! binary field format.

pub mod config;
pub mod hsnf;
pub mod report;
pub mod scenarios;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use config::{Diagnostic, ExperimentConfig};
use report::{Report, Timing};

pub const DEFAULT_OUTPUT: &str = "heisenfft-out";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("numerics: {0}")]
    Core(#[from] heisenfft_core::Error),
}

impl RunError {
    /// 2 for configuration problems, 1 for everything found while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Read { .. } | RunError::Parse(_) | RunError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Read { path: path.into(), source })?;
    Ok(ExperimentConfig::from_json(&text)?)
}

/// Validates, executes and writes every artifact into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report, RunError> {
    let diagnostics = cfg.validate();
    if !diagnostics.is_empty() {
        return Err(RunError::Invalid(diagnostics));
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome = scenarios::execute(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut report = outcome.report;
    for table in &outcome.tables {
        table.write(out_dir)?;
        report.artifacts.push(table.file_name());
    }
    for (name, dump) in &outcome.dumps {
        let file = format!("{name}.hsnf");
        hsnf::save(&out_dir.join(&file), dump)?;
        report.artifacts.push(file);
    }
    report.artifacts.sort();
    fs::write(out_dir.join("report.json"), report.to_json())?;
    let unix_ms = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
    Timing {
        started_unix_ms: unix_ms(started),
        finished_unix_ms: unix_ms(SystemTime::now()),
        elapsed_ms: clock.elapsed().as_millis(),
    }
    .write(out_dir)?;
    Ok(report)
}
