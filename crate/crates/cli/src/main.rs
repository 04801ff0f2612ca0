//! `pnsim` — Monte Carlo harness for ML detection on phase-noise-impaired
//! SIMO links.
//!
//! Experiments are driven by JSON manifests; every subcommand writes a
//! fixed-schema CSV (to `--out`, with a gnuplot companion, or to stdout).

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pnsimo::harness::{
    self, floor_bounds_csv, run_floor_and_bounds, run_oracle_validation, run_ser_sweep,
    run_truncation_stats, run_tslot_comparison, sweep_csv, sweep_plot_script, truncation_csv,
    tslot_csv, tslot_plot_script, SweepConfig,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pnsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo SER sweep over the configured (channel, mode, M, SNR) grid.
    Sweep(RunArgs),
    /// Analytic high-SNR SER floors for the configured model.
    Floors(RunArgs),
    /// Floors plus pairwise-error union bounds, checked against Monte Carlo
    /// at the top of the SNR grid.
    Bounds(RunArgs),
    /// Series truncation statistics (mean and max terms per grid cell).
    Truncation(RunArgs),
    /// Validate the detectors against the quadrature oracle on random small
    /// instances; exits nonzero on any disagreement.
    Validate(ValidateArgs),
    /// Multi-slot comparison: decision-feedback NS vs genie-aided S.
    Tslot(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment manifest.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Trials-per-point override.
    #[arg(long)]
    trials: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::from_path(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
            cfg.target_errors = cfg.target_errors.min(trials);
        }
        Ok(cfg)
    }

    fn emit(&self, csv: String, plot: Option<String>) -> Result<()> {
        match &self.out {
            Some(path) => {
                harness::write_output(path, &csv, plot.as_deref())?;
                eprintln!("wrote {}", path.display());
                Ok(())
            }
            None => {
                print!("{csv}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Instances per scenario.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread count; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let rows = run_ser_sweep(&cfg, args.threads)?;
            let plot = args
                .out
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|n| sweep_plot_script(&n.to_string_lossy()));
            args.emit(sweep_csv(&rows), plot)
        }
        Command::Floors(args) => {
            let cfg = args.load()?;
            let rows = run_floor_and_bounds(&cfg, args.threads, false)?;
            args.emit(floor_bounds_csv(&rows), None)
        }
        Command::Bounds(args) => {
            let cfg = args.load()?;
            let rows = run_floor_and_bounds(&cfg, args.threads, true)?;
            args.emit(floor_bounds_csv(&rows), None)
        }
        Command::Truncation(args) => {
            let cfg = args.load()?;
            let rows = run_truncation_stats(&cfg, args.threads)?;
            args.emit(truncation_csv(&rows), None)
        }
        Command::Tslot(args) => {
            let cfg = args.load()?;
            let rows = run_tslot_comparison(&cfg, args.threads)?;
            let plot = args
                .out
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|n| tslot_plot_script(&n.to_string_lossy()));
            args.emit(tslot_csv(&rows), plot)
        }
        Command::Validate(args) => {
            let report = run_oracle_validation(args.trials as usize, args.seed, args.threads)?;
            print!("{}", report.summary());
            if !report.pass() {
                std::process::exit(1);
            }
            Ok(())
        }
    }
}
