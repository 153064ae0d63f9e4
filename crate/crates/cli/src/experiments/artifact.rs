//! Structured k-space artifacts caused by signal outside the voxel FOV, on
//! radial, spiral, rosette and bunched phase encoding trajectories.

use anyhow::{bail, Result};
use kspace_core::analysis::{artifact_experiment, ArtifactOutcome};
use kspace_core::phantom::out_of_fov_ellipse;
use kspace_core::trajectory::{make_bunched_phase_encoding, make_radial, make_rosette, make_spiral};
use kspace_core::{Dims, EllipsePhantom, ModelSpec, Trajectory};

use crate::config::Params;
use crate::output::OutDir;

pub const TRAJECTORIES: [&str; 4] = ["radial", "spiral", "rosette", "bpe"];

#[derive(Clone, Debug, PartialEq)]
pub struct ArtifactParams {
    pub n: usize,
    pub dx: f64,
    pub p: usize,
    pub rho: f64,
    pub lambda_rel: f64,
    pub fraction: f64,
    pub rosette_fraction: f64,
    pub trajectories: Vec<String>,
    pub seed: u64,
}

impl ArtifactParams {
    pub fn from_params(p: &mut Params) -> Result<Self> {
        let defaults: Vec<String> = TRAJECTORIES.iter().map(|s| s.to_string()).collect();
        Ok(ArtifactParams {
            n: p.get("n", 64)?,
            dx: p.get("dx", 1.0)?,
            p: p.get("p", 3)?,
            rho: p.get("rho", 1.3)?,
            lambda_rel: p.get("lambda_rel", 1e-3)?,
            fraction: p.get("nullspace_fraction", 0.05)?,
            rosette_fraction: p.get("rosette_nullspace_fraction", 0.1)?,
            trajectories: p.list("trajectories", &defaults)?,
            seed: p.get("seed", 0)?,
        })
    }
}

/// Trajectory family scaled to an `n x n` grid, restricted to the voxel
/// model's central k-space period `[-1/(2 dx), 1/(2 dx))`.
pub fn trajectory(name: &str, n: usize, dx: f64) -> Result<Trajectory> {
    let kmax = 0.5 / dx;
    let nf = n as f64;
    let t = match name {
        "radial" => make_radial((std::f64::consts::FRAC_PI_2 * nf).round() as usize, n, kmax)?,
        "spiral" => {
            // 17 interleaves of 3030 samples at N = 256, scaled to n with the
            // same M / N^2
            let interleaves = ((17.0 * nf / 256.0).round() as usize).max(1);
            let samples = (17.0 * 3030.0 / 65536.0 * nf * nf / interleaves as f64).round() as usize;
            make_spiral(interleaves, samples, nf / (2.0 * interleaves as f64), kmax)?
        }
        "rosette" => make_rosette(nf / 2.0 + 0.5, nf / 4.0 + 0.25, 2 * n * n, kmax)?,
        "bpe" => {
            let base = make_spiral(4, n * n / 5, nf / 16.0, kmax)?;
            let off = 0.5 / (nf * dx);
            make_bunched_phase_encoding(&base, &[[0.0, 0.0], [0.0, off], [0.0, -off]])?
        }
        other => bail!("unknown trajectory `{other}` (expected one of {})", TRAJECTORIES.join(", ")),
    };
    Ok(t.within_band(kmax)?)
}

pub struct TrajectoryArtifacts {
    pub name: String,
    pub fraction: f64,
    pub outcome: ArtifactOutcome,
}

pub fn run(params: &ArtifactParams, out: Option<&OutDir>) -> Result<Vec<TrajectoryArtifacts>> {
    let n = params.n;
    let fov = n as f64 * params.dx;
    let outside = EllipsePhantom::new(Dims::Two, vec![out_of_fov_ellipse(fov)])?;
    let vspec = ModelSpec::voxel(Dims::Two, n, params.dx)?;
    let kspec = ModelSpec::kspace(Dims::Two, n, params.dx, params.p, params.rho)?;
    let mut results = Vec::new();
    for name in &params.trajectories {
        let t = trajectory(name, n, params.dx)?;
        let fraction = if name == "rosette" { params.rosette_fraction } else { params.fraction };
        let outcome = artifact_experiment(&t, &outside, &vspec, &kspec, params.lambda_rel, fraction)?;
        log::info!(
            "{name}: {} samples, near-nullspace share {:.3}, axis energy voxel {:.3} / k-space {:.3}",
            outcome.samples,
            outcome.nullspace_fraction,
            outcome.axis_voxel,
            outcome.axis_kspace
        );
        if let Some(o) = out {
            o.image(&format!("kspace_voxel_{name}"), n, &outcome.voxel_kspace)?;
            o.image(&format!("kspace_kspace_{name}"), n, &outcome.kspace_kspace)?;
            o.image(&format!("nullspace_{name}"), n, &outcome.voxel_nullspace)?;
            o.image(&format!("artifact_voxel_{name}"), n, &outcome.voxel_artifact)?;
            t.write_csv(o.file(&format!("trajectory_{name}.csv"))?)?;
        }
        results.push(TrajectoryArtifacts { name: name.clone(), fraction, outcome });
    }
    if let Some(o) = out {
        let mut w = o.csv("artifacts.csv")?;
        w.write_record([
            "trajectory",
            "samples",
            "sigma_fraction",
            "near_nullspace_dim",
            "nullspace_energy_fraction",
            "axis_voxel",
            "axis_kspace",
            "energy_voxel",
            "energy_kspace",
        ])?;
        for r in &results {
            let a = &r.outcome;
            w.write_record([
                r.name.clone(),
                a.samples.to_string(),
                r.fraction.to_string(),
                a.near_nullspace_dim.to_string(),
                a.nullspace_fraction.to_string(),
                a.axis_voxel.to_string(),
                a.axis_kspace.to_string(),
                a.energy_voxel.to_string(),
                a.energy_kspace.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(results)
}
