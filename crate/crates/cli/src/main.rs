use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bmhull_cli::commands::{simulate, sweep, verify, SweepInner};
use bmhull_cli::config::{OutFormat, RunConfig};
use bmhull_cli::suites::Suite;
use clap::{Parser, Subcommand};

/// Simulate Brownian hulls over Poisson rain and verify the quantitative bounds.
#[derive(Debug, Parser)]
#[command(name = "bmhull", version)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

/// Flags override values from `--config`, which override built-in defaults.
#[derive(Debug, clap::Args)]
struct Flags {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Level, or comma-separated levels for `simulate`.
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Cutoff of the Z_a region.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Replicas (or instances) for every check, replacing the per-check defaults.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Grid points per unit time.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    confidence: Option<f64>,
    /// Output directory for `simulate`, output file otherwise (default: $BMHULL_OUT_DIR or stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Wall-clock value recorded in outputs (seconds since the epoch).
    #[arg(long, global = true)]
    timestamp: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a coupled path, its rain and the hulls K_alpha for each level.
    Simulate,
    /// Run a verification suite; exits nonzero if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Repeat a computation over values of one configuration key.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "")]
        values: String,
        #[arg(long, value_enum)]
        inner: SweepInner,
    },
}

fn build_config(f: &Flags) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &f.config {
        cfg.apply_file(p)?;
    }
    let pairs: [(&str, Option<String>); 11] = [
        ("seed", f.seed.map(|v| v.to_string())),
        ("alpha", f.alpha.clone()),
        ("kappa", f.kappa.map(|v| v.to_string())),
        ("dim", f.dim.map(|v| v.to_string())),
        ("n", f.n.map(|v| v.to_string())),
        ("a", f.a.map(|v| v.to_string())),
        ("replicas", f.replicas.map(|v| v.to_string())),
        ("grid", f.grid.map(|v| v.to_string())),
        ("confidence", f.confidence.map(|v| v.to_string())),
        ("out", f.out.as_ref().map(|p| p.display().to_string())),
        ("workers", f.workers.map(|v| v.to_string())),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(fmt) = f.format {
        cfg.format = fmt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = build_config(&cli.flags)?;
    let ts = cli.flags.timestamp;
    match cli.command {
        Command::Simulate => {
            for f in simulate(&cfg, ts)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Verify { suite } => verify(suite, &cfg, ts),
        Command::Sweep { param, values, inner } => {
            let values: Vec<String> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            sweep(&param, &values, inner, &cfg, ts)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
