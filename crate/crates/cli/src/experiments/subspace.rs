//! Singular spectra and mean singular value index maps of `A` and `H`.

use anyhow::Result;
use kspace_core::analysis::{subspace_map, SubspaceMap};
use kspace_core::trajectory::make_radial;
use kspace_core::{Dims, ModelSpec};

use crate::config::Params;
use crate::output::OutDir;

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceParams {
    pub n: usize,
    pub dx: f64,
    pub spokes: usize,
    pub samples_per_spoke: usize,
    pub kmax: f64,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

impl SubspaceParams {
    pub fn from_params(p: &mut Params) -> Result<Self> {
        Ok(SubspaceParams {
            n: p.get("n", 48)?,
            dx: p.get("dx", 1.0)?,
            spokes: p.get("spokes", 75)?,
            samples_per_spoke: p.get("samples_per_spoke", 48)?,
            kmax: p.get("kmax", 0.5)?,
            p: p.get("p", 3)?,
            rho: p.get("rho", 1.3)?,
            seed: p.get("seed", 0)?,
        })
    }
}

pub struct SubspaceReport {
    pub voxel: SubspaceMap,
    pub kspace: SubspaceMap,
}

pub fn run(params: &SubspaceParams, out: Option<&OutDir>) -> Result<SubspaceReport> {
    let t = make_radial(params.spokes, params.samples_per_spoke, params.kmax)?;
    let vspec = ModelSpec::voxel(Dims::Two, params.n, params.dx)?;
    let kspec = ModelSpec::kspace(Dims::Two, params.n, params.dx, params.p, params.rho)?;
    let voxel = subspace_map(&t, &vspec)?;
    let kspace = subspace_map(&t, &kspec)?;
    for (name, m) in [("voxel", &voxel), ("kspace", &kspace)] {
        let (c, e) = m.center_edge_means();
        log::info!("{name}: mu center {c:.1}, edge {e:.1}");
    }
    if let Some(o) = out {
        let mut w = o.csv("spectrum.csv")?;
        w.write_record(["model", "index", "sigma"])?;
        for (name, m) in [("voxel", &voxel), ("kspace", &kspace)] {
            for (i, s) in m.singular_values.iter().enumerate() {
                w.write_record([name, &(i + 1).to_string(), &s.to_string()])?;
            }
        }
        w.flush()?;
        let mut w = o.csv("mu_summary.csv")?;
        w.write_record(["model", "side", "center_mean", "edge_mean"])?;
        for (name, m) in [("voxel", &voxel), ("kspace", &kspace)] {
            let (c, e) = m.center_edge_means();
            w.write_record([name, &m.side.to_string(), &c.to_string(), &e.to_string()])?;
        }
        w.flush()?;
        o.real_map("mu_voxel", voxel.side, &voxel.mu)?;
        o.real_map("mu_kspace", kspace.side, &kspace.mu)?;
    }
    Ok(SubspaceReport { voxel, kspace })
}
