//! Approximation error sweeps and the RMS contour over `(rho, P)`.

use anyhow::Result;
use kspace_core::analysis::{
    approx_error_sweep, default_x0_range, linspace, rms_error_contour, rms_of_sweep, write_contour_csv,
    ApproxErrorSpec, ErrorSweep,
};
use kspace_core::{Dims, ModelSpec};

use crate::config::Params;
use crate::output::OutDir;

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub n: usize,
    pub dx: f64,
    pub p: usize,
    pub rho: f64,
    pub quad_nodes: usize,
    pub num_x0: usize,
    pub contour: bool,
    pub contour_p: Vec<usize>,
    pub contour_rho: Vec<f64>,
    pub contour_num_x0: usize,
    pub seed: u64,
}

impl ApproxParams {
    pub fn from_params(p: &mut Params) -> Result<Self> {
        Ok(ApproxParams {
            n: p.get("n", 64)?,
            dx: p.get("dx", 1.0)?,
            p: p.get("p", 3)?,
            rho: p.get("rho", 1.3)?,
            quad_nodes: p.get("quad_nodes", 4096)?,
            num_x0: p.get("num_x0", 513)?,
            contour: p.get("contour", true)?,
            contour_p: p.list("contour_p", &[1, 2, 3, 4])?,
            contour_rho: p.list("contour_rho", &[1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.75, 2.0])?,
            contour_num_x0: p.get("contour_num_x0", 129)?,
            seed: p.get("seed", 0)?,
        })
    }
}

pub struct ApproxReport {
    pub voxel: ErrorSweep,
    pub kspace: ErrorSweep,
    pub rms_voxel: f64,
    pub rms_kspace: f64,
    /// Rows follow `contour_p`, columns `contour_rho`.
    pub contour: Option<Vec<Vec<f64>>>,
}

pub fn run(params: &ApproxParams, out: Option<&OutDir>) -> Result<ApproxReport> {
    let vmodel = ModelSpec::voxel(Dims::One, params.n, params.dx)?;
    let kmodel = ModelSpec::kspace(Dims::One, params.n, params.dx, params.p, params.rho)?;
    let range = default_x0_range(&vmodel);
    let x0s = linspace(range[0], range[1], params.num_x0);
    let voxel = approx_error_sweep(&x0s, &ApproxErrorSpec::new(vmodel, params.quad_nodes)?)?;
    let kspace = approx_error_sweep(&x0s, &ApproxErrorSpec::new(kmodel, params.quad_nodes)?)?;
    let rms_voxel = rms_of_sweep(&voxel.error_pct);
    let rms_kspace = rms_of_sweep(&kspace.error_pct);
    log::info!("RMS error: voxel {rms_voxel:.3}%, k-space {rms_kspace:.3}%");

    let contour = if params.contour {
        let base = ApproxErrorSpec::new(kmodel, params.quad_nodes)?;
        Some(rms_error_contour(&params.contour_p, &params.contour_rho, &base, params.contour_num_x0)?)
    } else {
        None
    };

    if let Some(o) = out {
        let mut w = o.csv("e_sweep.csv")?;
        w.write_record(["x0", "voxel_pct", "kspace_pct"])?;
        for ((x, a), b) in x0s.iter().zip(&voxel.error_pct).zip(&kspace.error_pct) {
            w.write_record([x.to_string(), a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        let mut w = o.csv("rms.csv")?;
        w.write_record(["model", "rms_pct", "quad_nodes", "refined"])?;
        for (name, sweep, rms) in [("voxel", &voxel, rms_voxel), ("kspace", &kspace, rms_kspace)] {
            w.write_record([name, &rms.to_string(), &sweep.quad_nodes.to_string(), &sweep.refined.to_string()])?;
        }
        w.flush()?;
        if let Some(table) = &contour {
            write_contour_csv(&params.contour_p, &params.contour_rho, table, o.file("contour.csv")?)?;
        }
    }
    Ok(ApproxReport { voxel, kspace, rms_voxel, rms_kspace, contour })
}
