use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use packlab_cli::config::{ExperimentConfig, ExperimentKind};
use packlab_cli::runner::{resolve_workers, run};
use packlab_cli::CliError;

#[derive(Parser)]
#[command(name = "packlab", version, about = "Random sequential adsorption experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pack a window and report accepted densities.
    Pack(Common),
    /// One-point profiles, pair correlations, clustering and the covariance constant.
    Correlate(Common),
    /// Gaussianity of rescaled box counts.
    Clt(Common),
    /// Finite- versus infinite-volume boundary processes.
    Boundary(Common),
    /// Escape of causal cones from cone sets.
    Cones(Common),
    /// Nearest-neighbour measures and stabilisation radii.
    Nn(Common),
    /// Reference values: density quadrature and brute-force acceptance.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides PACKLAB_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// Repeatable; replaces the configured lambda grid.
    #[arg(long = "lambda")]
    lambdas: Vec<f64>,
    #[arg(long)]
    replicates: Option<usize>,
}

fn build(kind: ExperimentKind, a: &Common) -> Result<ExperimentConfig, CliError> {
    let mut c = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(kind),
    };
    if c.experiment != kind {
        return Err(CliError::Config(format!("config is for {:?}, not {:?}", c.experiment, kind)));
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(d) = a.dim {
        c.dim = d;
    }
    if let Some(t) = a.tau {
        c.tau = t;
    }
    if !a.lambdas.is_empty() {
        c.lambdas = a.lambdas.clone();
    }
    if let Some(r) = a.replicates {
        c.replicates = r;
    }
    if let Some(o) = &a.out {
        c.out = Some(o.clone());
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Pack(a) => (ExperimentKind::Pack, a),
        Command::Correlate(a) => (ExperimentKind::Correlate, a),
        Command::Clt(a) => (ExperimentKind::Clt, a),
        Command::Boundary(a) => (ExperimentKind::Boundary, a),
        Command::Cones(a) => (ExperimentKind::Cones, a),
        Command::Nn(a) => (ExperimentKind::Nn, a),
        Command::Oracle(a) => (ExperimentKind::Oracle, a),
    };
    let result = build(kind, args).and_then(|c| {
        let workers = resolve_workers(args.workers)?;
        run(&c, workers, None)
    });
    match result {
        Ok(m) => {
            for f in &m.files {
                println!("{}  {}", f.sha256, f.name);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("packlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
