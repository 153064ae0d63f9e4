//! Experiment drivers behind the `recon` binary.
//!
//! Each subcommand reads a flat `key = value` config, writes `params.txt`
//! with every resolved value, and leaves its results as CSV, `.f32` and
//! `.pgm` files in the output directory.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Config, Params, Resolved};
pub use output::OutDir;

use anyhow::{bail, Result};

use experiments::{approx, artifact, reconstruct, sense, subspace};

pub const SUBCOMMANDS: [&str; 5] = ["approx-error", "reconstruct", "artifact-demo", "subspace", "sense-tv"];

pub enum Report {
    Approx(approx::ApproxReport),
    Reconstruct(reconstruct::ReconstructReport),
    Artifact(Vec<artifact::TrajectoryArtifacts>),
    Subspace(subspace::SubspaceReport),
    Sense(sense::SenseReport),
}

/// Resolves `config` for `subcommand`, writes `params.txt` and runs the
/// experiment. Unknown keys are rejected before any work starts.
pub fn run_subcommand(subcommand: &str, config: &Config, out: Option<&OutDir>) -> Result<Report> {
    let mut p = Params::new(config);
    macro_rules! resolve {
        ($params:ty) => {{
            let params = <$params>::from_params(&mut p)?;
            let resolved = p.finish()?;
            if let Some(o) = out {
                o.write_text("params.txt", &resolved.to_text(subcommand))?;
            }
            params
        }};
    }
    Ok(match subcommand {
        "approx-error" => Report::Approx(approx::run(&resolve!(approx::ApproxParams), out)?),
        "reconstruct" => Report::Reconstruct(reconstruct::run(&resolve!(reconstruct::ReconstructParams), out)?),
        "artifact-demo" => Report::Artifact(artifact::run(&resolve!(artifact::ArtifactParams), out)?),
        "subspace" => Report::Subspace(subspace::run(&resolve!(subspace::SubspaceParams), out)?),
        "sense-tv" => Report::Sense(sense::run(&resolve!(sense::SenseParams), out)?),
        other => bail!("unknown subcommand `{other}` (expected one of {})", SUBCOMMANDS.join(", ")),
    })
}
