//! Single-channel Tikhonov reconstruction of a ~Nyquist spiral with both
//! models: CG convergence accounting and LSQR per-iteration timing.

use anyhow::{bail, Result};
use kspace_core::analysis::{
    convergence_maps, iterations_to_ssim, kspace_display_grid, model_image, ssim, CONVERGENCE_SSIM,
};
use kspace_core::operators::{
    build_gridding_operator, build_kspace_operator, build_toeplitz_gram, build_voxel_operator, evaluate_kspace_model,
    evaluate_kspace_voxel_grid, LinearOperator, NormalOperator,
};
use kspace_core::phantom::{add_noise, head_phantom, out_of_fov_ellipse, sample_phantom};
use kspace_core::solvers::{cg_tikhonov, cg_tikhonov_gram, lsqr_tikhonov, power_iteration_gram};
use kspace_core::trajectory::make_spiral;
use kspace_core::{Dims, ModelSpec, ReconResult, SolveConfig, C64};

use crate::config::Params;
use crate::output::OutDir;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructParams {
    pub n: usize,
    pub dx: f64,
    pub interleaves: usize,
    pub samples_per_readout: usize,
    pub turns: f64,
    pub kmax: f64,
    pub outside_ellipse: bool,
    pub noise_rel: f64,
    pub p: usize,
    pub rho: f64,
    pub lambda_rel: f64,
    pub cg_iters: usize,
    pub lsqr_iters: usize,
    pub lsqr_voxel_backend: String,
    pub seed: u64,
}

impl ReconstructParams {
    pub fn from_params(p: &mut Params) -> Result<Self> {
        Ok(ReconstructParams {
            n: p.get("n", 128)?,
            dx: p.get("dx", 1.0)?,
            interleaves: p.get("interleaves", 16)?,
            samples_per_readout: p.get("samples_per_readout", 1536)?,
            turns: p.get("turns", 4.0)?,
            kmax: p.get("kmax", 0.49)?,
            outside_ellipse: p.get("outside_ellipse", false)?,
            noise_rel: p.get("noise_rel", 1e-4)?,
            p: p.get("p", 3)?,
            rho: p.get("rho", 1.3)?,
            lambda_rel: p.get("lambda_rel", 1e-3)?,
            cg_iters: p.get("cg_iters", 150)?,
            lsqr_iters: p.get("lsqr_iters", 50)?,
            lsqr_voxel_backend: p.get("lsqr_voxel_backend", "gridding".to_string())?,
            seed: p.get("seed", 0)?,
        })
    }
}

pub struct ModelRun {
    pub model: &'static str,
    /// Converged image on the reconstruction grid.
    pub image: Vec<C64>,
    pub lambda: f64,
    pub cg_iterations: usize,
    /// First CG iteration after which SSIM against the converged image stays
    /// at or above 0.95.
    pub iterations_to_ssim: Option<usize>,
    pub median_local_iterations: f64,
    pub cg_seconds_per_iteration: f64,
    pub lsqr_iterations: usize,
    pub lsqr_seconds_per_iteration: f64,
    /// SSIM of the converged image against the rasterized phantom.
    pub ssim_truth: f64,
}

pub struct ReconstructReport {
    pub samples: usize,
    pub side: usize,
    pub truth: Vec<C64>,
    pub voxel: ModelRun,
    pub kspace: ModelRun,
}

fn images(snaps: &[Vec<C64>], spec: &ModelSpec) -> Result<Vec<Vec<C64>>> {
    Ok(snaps.iter().map(|c| model_image(c, spec)).collect::<kspace_core::Result<_>>()?)
}

fn account(
    model: &'static str,
    spec: &ModelSpec,
    lambda: f64,
    cg: &ReconResult,
    lsqr: &ReconResult,
    truth: &[C64],
    side: usize,
) -> Result<(ModelRun, Vec<u32>)> {
    let image = model_image(&cg.coefficients, spec)?;
    let snaps = images(&cg.iterate_snapshots, spec)?;
    let iters = iterations_to_ssim(&snaps, &image, side, side, CONVERGENCE_SSIM)?;
    let maps = convergence_maps(&snaps, &cg.time_history, &image, side, side, CONVERGENCE_SSIM)?;
    let median = maps.median_iterations(|i| truth[i].norm() > 0.0);
    let ssim_truth = ssim(truth, &image, side, side, None)?;
    log::info!(
        "{model}: CG {} its ({:.2e} s/it), SSIM-0.95 at {iters:?}; LSQR {:.2e} s/it; SSIM vs phantom {ssim_truth:.3}",
        cg.iterations(),
        cg.seconds_per_iteration(),
        lsqr.seconds_per_iteration()
    );
    let run = ModelRun {
        model,
        image,
        lambda,
        cg_iterations: cg.iterations(),
        iterations_to_ssim: iters,
        median_local_iterations: median,
        cg_seconds_per_iteration: cg.seconds_per_iteration(),
        lsqr_iterations: lsqr.iterations(),
        lsqr_seconds_per_iteration: lsqr.seconds_per_iteration(),
        ssim_truth,
    };
    Ok((run, maps.iterations.iter().map(|&k| k as u32).collect()))
}

pub fn run(params: &ReconstructParams, out: Option<&OutDir>) -> Result<ReconstructReport> {
    let side = params.n;
    let fov = params.n as f64 * params.dx;
    let mut phantom = head_phantom(fov);
    if params.outside_ellipse {
        phantom.push(out_of_fov_ellipse(fov));
    }
    let t = make_spiral(params.interleaves, params.samples_per_readout, params.turns, params.kmax)?;
    let clean = sample_phantom(&phantom, &t)?;
    let peak = clean.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let d = add_noise(&clean, params.noise_rel * peak, params.seed)?;
    let truth = phantom.rasterize(side, params.dx, 4);

    let vspec = ModelSpec::voxel(Dims::Two, side, params.dx)?;
    let kspec = ModelSpec::kspace(Dims::Two, side, params.dx, params.p, params.rho)?;
    let cg_cfg = |lambda: f64| SolveConfig {
        max_iters: params.cg_iters,
        lambda,
        tol: 1e-12,
        record_iterates: true,
        seed: params.seed,
        monotone: false,
    };
    let lsqr_cfg = |lambda: f64| SolveConfig {
        max_iters: params.lsqr_iters,
        lambda,
        tol: 1e-12,
        record_iterates: false,
        seed: params.seed,
        monotone: false,
    };

    // voxel: CG on the exact Toeplitz Gram, LSQR on the forward operator
    let gram = build_toeplitz_gram(&t, &vspec)?;
    let lam_v = params.lambda_rel * power_iteration_gram(&gram, 100, params.seed).0;
    let exact = build_voxel_operator(&t, &vspec)?;
    let rhs = exact.adjoint(&d);
    let d2: f64 = d.iter().map(|v| v.norm_sqr()).sum();
    let cg_v = cg_tikhonov_gram(&gram, &rhs, d2, &cg_cfg(lam_v))?;
    let lsqr_v = match params.lsqr_voxel_backend.as_str() {
        "gridding" => lsqr_tikhonov(&build_gridding_operator(&t, &vspec, 2.0, 4)?, &d, &lsqr_cfg(lam_v))?,
        "exact" => lsqr_tikhonov(&exact, &d, &lsqr_cfg(lam_v))?,
        other => bail!("lsqr_voxel_backend must be `gridding` or `exact`, got `{other}`"),
    };

    let h = build_kspace_operator(&t, &kspec)?;
    let lam_k = params.lambda_rel * power_iteration_gram(&NormalOperator::new(&h), 100, params.seed).0;
    let cg_k = cg_tikhonov(&h, &d, &cg_cfg(lam_k))?;
    let lsqr_k = lsqr_tikhonov(&h, &d, &lsqr_cfg(lam_k))?;

    let (voxel, conv_v) = account("voxel", &vspec, lam_v, &cg_v, &lsqr_v, &truth, side)?;
    let (kspace, conv_k) = account("kspace", &kspec, lam_k, &cg_k, &lsqr_k, &truth, side)?;

    if let Some(o) = out {
        o.image("img_truth", side, &truth)?;
        o.image("img_voxel", side, &voxel.image)?;
        o.image("img_kspace", side, &kspace.image)?;
        for (name, conv) in [("voxel", &conv_v), ("kspace", &conv_k)] {
            let m: Vec<f64> = conv.iter().map(|&k| k as f64).collect();
            o.real_map(&format!("conv_iters_{name}"), side, &m)?;
        }
        // reconstructed k-space over [-1/(2 dx), 1/(2 dx)) at half the voxel
        // model's k-space spacing
        let g = 2 * side;
        let kv = evaluate_kspace_voxel_grid(&cg_v.coefficients, &vspec, g)?;
        let kk = evaluate_kspace_model(&cg_k.coefficients, &kspace_display_grid(g, params.dx), &kspec)?;
        o.image("kspace_voxel", g, &kv)?;
        o.image("kspace_kspace", g, &kk)?;
        t.write_csv(o.file("trajectory.csv")?)?;

        let mut w = o.csv("iters.csv")?;
        w.write_record(["model", "cg_iterations", "iterations_to_ssim", "median_local_iterations", "ssim_vs_phantom"])?;
        for r in [&voxel, &kspace] {
            w.write_record([
                r.model.to_string(),
                r.cg_iterations.to_string(),
                r.iterations_to_ssim.map_or("none".to_string(), |k| k.to_string()),
                r.median_local_iterations.to_string(),
                r.ssim_truth.to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = o.csv("timing.csv")?;
        w.write_record(["model", "solver", "iterations", "seconds_per_iteration", "samples"])?;
        for r in [&voxel, &kspace] {
            for (solver, its, spi) in [
                ("cg", r.cg_iterations, r.cg_seconds_per_iteration),
                ("lsqr", r.lsqr_iterations, r.lsqr_seconds_per_iteration),
            ] {
                w.write_record([r.model, solver, &its.to_string(), &spi.to_string(), &t.len().to_string()])?;
            }
        }
        w.flush()?;
        cg_v.write_history_csv(o.file("history_voxel_cg.csv")?)?;
        cg_k.write_history_csv(o.file("history_kspace_cg.csv")?)?;
    }
    Ok(ReconstructReport { samples: t.len(), side, truth, voxel, kspace })
}
