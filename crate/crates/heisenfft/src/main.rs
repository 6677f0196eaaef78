use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heisenfft::config::{ExperimentConfig, Scenario};
use heisenfft::{load_config, run, RunError, DEFAULT_OUTPUT};

#[derive(Parser)]
#[command(name = "heisenfft", version, about = "Numerical experiments for the Schrödinger equation on the Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json, CSV tables and dumps.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized checks; overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the diagnostics that would stop `run`.
    Validate { config: PathBuf },
    /// Print the default config of a scenario.
    DumpDefaults {
        #[arg(value_parser = |s: &str| s.parse::<Scenario>())]
        scenario: Scenario,
    },
}

/// A closed stdout (`| head`) is not an error worth a panic.
fn say(line: std::fmt::Arguments<'_>) {
    let _ = writeln!(io::stdout(), "{line}");
}

fn fail(err: RunError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, seed } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| DEFAULT_OUTPUT.into());
            match run(&cfg, &dir) {
                Ok(report) => {
                    for c in &report.checks {
                        say(format_args!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.id));
                    }
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        let ids: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
                        eprintln!("assertion failure: {}", ids.join(", "));
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let diagnostics = cfg.validate();
            for d in &diagnostics {
                say(format_args!("{d}"));
            }
            if diagnostics.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::DumpDefaults { scenario } => {
            say(format_args!("{}", ExperimentConfig::defaults(scenario).to_json()));
            ExitCode::SUCCESS
        }
    }
}
