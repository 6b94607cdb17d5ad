//! `emkahler`: run declarative verification scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod catalog;
mod checks;
mod error;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::checks::CheckRegistry;
use crate::error::ConfigError;
use crate::report::{RunOptions, Status};

#[derive(Parser)]
#[command(name = "emkahler", version, about = "Curvature identity and Einstein–Maxwell checks on Kähler surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (JSON or TOML) or a bundled scenario by name.
    Run {
        scenario: String,
        /// Quadrature nodes per axis, overriding the scenario.
        #[arg(long)]
        resolution: Option<usize>,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Byte-for-byte reproducible report (no timings).
        #[arg(long)]
        deterministic: bool,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for convergence tables.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List bundled scenarios.
    List {
        /// Keep scenarios whose name, geometry or module contains this.
        #[arg(long)]
        filter: Option<String>,
    },
    /// List available checks.
    Checks,
}

fn run(path: &str, opts: &RunOptions, out: Option<PathBuf>, csv: Option<PathBuf>) -> Result<u8, ConfigError> {
    let registry = CheckRegistry::with_builtins();
    let s = if Path::new(path).exists() {
        scenario::load(path)?
    } else if let Some(b) = catalog::find(path) {
        b.scenario()?
    } else {
        return Err(ConfigError::Read {
            path: path.into(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario"),
        });
    };
    let report = report::run(&s, path, opts, &registry)?;

    let out = out.or_else(|| s.output.report.as_ref().map(PathBuf::from));
    match &out {
        Some(p) => std::fs::write(p, report.to_json())
            .map_err(|source| ConfigError::Write { path: p.display().to_string(), source })?,
        None => print!("{}", report.to_json()),
    }
    if let Some(dir) = csv.or_else(|| s.output.csv.as_ref().map(PathBuf::from)) {
        report::write_csv(&report, &dir)?;
    }
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Error => "ERROR",
        };
        match &c.error {
            Some(e) => eprintln!("{tag} {}: {e}", c.name),
            None => eprintln!("{tag} {}", c.name),
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, resolution, tolerance_scale, deterministic, out, csv } => {
            let opts = RunOptions { resolution, tolerance_scale, deterministic };
            run(&scenario, &opts, out, csv).unwrap_or_else(|e| {
                eprintln!("error: {e}");
                2
            })
        }
        Command::List { filter } => match catalog::list(filter.as_deref(), &CheckRegistry::with_builtins()) {
            Ok(entries) => {
                for e in entries {
                    println!("{:<34} {:<24} [{}] {}", e.name, e.geometry, e.modules.join(","), e.description);
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Checks => {
            for c in CheckRegistry::with_builtins().iter() {
                println!("{:<22} {:<15} {}", c.name(), c.module(), c.summary());
            }
            0
        }
    };
    ExitCode::from(code)
}
