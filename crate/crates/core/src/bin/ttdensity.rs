//! Command-line entry point for the experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ttdensity::experiments::{run, Experiment, ExperimentConfig, ExperimentError};

/// Regenerates tensor-train density experiments as CSV artifacts.
#[derive(Debug, Parser)]
#[command(name = "ttdensity", version)]
struct Cli {
    /// svd-cross, quadratic, gauss-ranks or grid-transform
    experiment: String,
    /// Output directory; artifacts go to <DIR>/<experiment>/
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative precision for TT-SVD and rounding
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Source grid spacing
    #[arg(long)]
    grid_step: Option<f64>,
    /// symmetric, cholesky or eigen (grid-transform only; default all three)
    #[arg(long)]
    root: Option<String>,
    /// full or stochastic (svd-cross only; default full)
    #[arg(long)]
    pivot: Option<String>,
    /// Experiment parameter override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn config(cli: Cli) -> Result<ExperimentConfig, ExperimentError> {
    let bad = |e: ttdensity::Error| ExperimentError::Config(e.to_string());
    let experiment: Experiment = cli.experiment.parse()?;
    let mut cfg = ExperimentConfig::new(experiment, cli.out);
    cfg.seed = cli.seed;
    cfg.eps = cli.eps;
    cfg.grid_step = cli.grid_step;
    cfg.root = cli
        .root
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(bad)?;
    cfg.pivot = cli
        .pivot
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(bad)?;
    for kv in &cli.set {
        cfg.add_override(kv)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match config(cli).and_then(|cfg| run(&cfg)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
