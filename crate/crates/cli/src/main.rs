use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, ValueEnum};
use kspace_cli::{run_subcommand, Config, OutDir};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subcommand {
    ApproxError,
    Reconstruct,
    ArtifactDemo,
    Subspace,
    SenseTv,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::ApproxError => "approx-error",
            Subcommand::Reconstruct => "reconstruct",
            Subcommand::ArtifactDemo => "artifact-demo",
            Subcommand::Subspace => "subspace",
            Subcommand::SenseTv => "sense-tv",
        }
    }
}

/// Voxel versus k-space model experiments for non-Cartesian Fourier imaging.
#[derive(Parser, Debug)]
#[command(name = "recon", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Flat `key = value` config file. Omit to run with defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the `seed` key of the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => Config::read(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.set("seed", seed);
    }
    let out = OutDir::create(&cli.out)?;
    let name = cli.subcommand.name();
    let start = std::time::Instant::now();
    run_subcommand(name, &config, Some(&out))?;
    log::info!("{name} finished in {:.1} s, outputs in {}", start.elapsed().as_secs_f64(), cli.out.display());
    Ok(())
}
