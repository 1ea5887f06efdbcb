//! `qstab` — experiment harness for the stability estimators.
//!
//! Exit status discipline:
//!   0  run completed and every must-hold verdict holds
//!   1  crash (I/O, invalid state, estimator failure)
//!   2  a must-hold verdict failed (the run itself completed)
//!   3  wall-clock budget exceeded; tables are emitted but incomplete
//!   4  config could not be parsed

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qstab_cli::{
    emit_tables, load_report, parse_config, run_scenario, Cache, RunOptions,
    CACHE_ENV,
};

#[derive(Parser)]
#[command(name = "qstab", about = "stability and relative-hyperbolicity experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a config file, run its scenario, and emit tables.
    Run {
        /// Path to the experiment config (key = value lines).
        config: PathBuf,
        /// Worker threads for independent grid items.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Wall-clock budget in seconds (overrides the config).
        #[arg(long)]
        budget_seconds: Option<u64>,
        /// Output directory (overrides the config).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Disable the construction cache for this run.
        #[arg(long)]
        no_cache: bool,
    },
    /// Inspect or clear the construction cache.
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
    /// Re-emit tables from a previously written report directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum CacheOp {
    /// List cached constructions (key prefix and descriptor).
    Ls,
    /// Remove cached entries; with no key, clears everything.
    Rm {
        /// Hex key prefix of the entry to remove.
        key: Option<String>,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("qstab: error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, threads, budget_seconds, output, no_cache } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let cfg = match parse_config(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("qstab: config invalid: {e}");
                    return Ok(ExitCode::from(4));
                }
            };
            let opts = RunOptions { threads, budget_seconds, no_cache, output, cache: None };
            let report = run_scenario(&cfg, &opts).map_err(|e| e.to_string())?;
            let dir = emit_tables(&report).map_err(|e| e.to_string())?;
            println!(
                "scenario={} hash={} rows={} verdicts={} wall_ms={} dir={}",
                report.scenario,
                &report.config_hash[..16],
                report.rows.len(),
                report.verdicts.len(),
                report.wall_ms,
                dir.display()
            );
            for v in &report.verdicts {
                println!(
                    "verdict {}: {}{}",
                    v.name,
                    if v.holds { "holds" } else { "FAILS" },
                    if v.must_hold { " (required)" } else { "" }
                );
            }
            if report.budget_exceeded {
                eprintln!("qstab: budget exceeded; tables are incomplete");
                return Ok(ExitCode::from(3));
            }
            if report.failed_must_hold() {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cache { op } => {
            let cache = Cache::from_env(false);
            match op {
                CacheOp::Ls => {
                    for (key, desc) in cache.ls() {
                        println!("{key}  {desc}");
                    }
                }
                CacheOp::Rm { key } => {
                    let n = cache.rm(key.as_deref());
                    println!("removed {n} entries (root from ${CACHE_ENV} or default)");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let report = load_report(&dir).map_err(|e| e.to_string())?;
            let out = emit_tables(&report).map_err(|e| e.to_string())?;
            println!(
                "re-emitted {} rows for scenario={} into {}",
                report.rows.len(),
                report.scenario,
                out.display()
            );
            if report.failed_must_hold() {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
