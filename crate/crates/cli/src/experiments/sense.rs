//! SENSE+TV on simulated multichannel radial data: voxel model, k-space model
//! and k-space model with per-channel centering.

use anyhow::Result;
use kspace_core::analysis::{convergence_maps, iterations_to_ssim, nrmse, CONVERGENCE_SSIM};
use kspace_core::multichannel::{
    centroid_centering, kspace_sense_problem, make_sensitivities, rescale_lambda, sense_image, simulate_multichannel,
    voxel_sense_problem, Centering, SenseProblem, VoxelBackend,
};
use kspace_core::phantom::head_phantom;
use kspace_core::trajectory::make_radial;
use kspace_core::{Dims, ModelSpec, SolveConfig, C64};

use crate::config::Params;
use crate::output::OutDir;

#[derive(Clone, Debug, PartialEq)]
pub struct SenseParams {
    pub n: usize,
    pub dx: f64,
    pub spokes: usize,
    pub samples_per_spoke: usize,
    pub kmax: f64,
    pub channels: usize,
    pub smoothness: f64,
    pub fine_factor: usize,
    pub noise_rel: f64,
    pub p: usize,
    pub rho: f64,
    pub lambda_rel: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub backend: String,
    pub seed: u64,
}

impl SenseParams {
    pub fn from_params(p: &mut Params) -> Result<Self> {
        Ok(SenseParams {
            n: p.get("n", 64)?,
            dx: p.get("dx", 1.0)?,
            spokes: p.get("spokes", 27)?,
            samples_per_spoke: p.get("samples_per_spoke", 128)?,
            kmax: p.get("kmax", 0.5)?,
            channels: p.get("channels", 8)?,
            smoothness: p.get("smoothness", 0.35)?,
            fine_factor: p.get("fine_factor", 4)?,
            noise_rel: p.get("noise_rel", 0.002)?,
            p: p.get("p", 3)?,
            rho: p.get("rho", 1.0)?,
            lambda_rel: p.get("lambda_rel", 0.01)?,
            max_iters: p.get("max_iters", 200)?,
            tol: p.get("tol", 1e-5)?,
            backend: p.get("voxel_backend", "gridding".to_string())?,
            seed: p.get("seed", 0)?,
        })
    }
}

pub struct VariantReport {
    pub name: &'static str,
    /// Converged image on the nominal `N x N` grid.
    pub image: Vec<C64>,
    pub lambda: f64,
    pub iterations_run: usize,
    /// First iteration after which the global SSIM against the converged
    /// image stays at or above 0.95.
    pub iterations_to_ssim: Option<usize>,
    /// Median of the local convergence map over the object support.
    pub median_local_iterations: f64,
    pub seconds_per_iteration: f64,
}

pub struct SenseReport {
    pub truth: Vec<C64>,
    pub variants: Vec<VariantReport>,
    /// `(i, j, NRMSE of variant j against variant i)`.
    pub pairwise_nrmse: Vec<(usize, usize, f64)>,
}

impl SenseReport {
    pub fn max_pairwise_nrmse(&self) -> f64 {
        self.pairwise_nrmse.iter().map(|t| t.2).fold(0.0, f64::max)
    }
}

fn adjoint_peak(problem: &SenseProblem, data: &[Vec<C64>]) -> f64 {
    let mut acc = vec![C64::new(0.0, 0.0); problem.operator(0).ncols()];
    for (q, d) in data.iter().enumerate() {
        for (a, v) in acc.iter_mut().zip(problem.operator(q).adjoint(d)) {
            *a += v;
        }
    }
    acc.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn run(params: &SenseParams, out: Option<&OutDir>) -> Result<SenseReport> {
    let n = params.n;
    let fov = n as f64 * params.dx;
    let phantom = head_phantom(fov);
    let t = make_radial(params.spokes, params.samples_per_spoke, params.kmax)?;
    let maps = make_sensitivities(Dims::Two, params.channels, fov, params.smoothness, params.seed)?;
    let clean = simulate_multichannel(&phantom, &maps, &t, fov, params.fine_factor * n)?;
    let peak = clean.data.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let data = clean.with_noise(params.noise_rel * peak, params.seed.wrapping_add(1000))?;

    let vspec = ModelSpec::voxel(Dims::Two, n, params.dx)?;
    let kspec = ModelSpec::kspace(Dims::Two, n, params.dx, params.p, params.rho)?;
    let backend = match params.backend.as_str() {
        "exact" => VoxelBackend::Exact,
        "gridding" => VoxelBackend::Gridding,
        other => anyhow::bail!("voxel_backend must be `exact` or `gridding`, got `{other}`"),
    };
    let voxel = voxel_sense_problem(&data, &maps, &vspec, backend)?;
    let plain = kspace_sense_problem(&data, &maps, &kspec, &Centering::None)?;
    let centered = kspace_sense_problem(&data, &maps, &kspec, &centroid_centering(&maps, &kspec)?)?;

    let lip_v = voxel.lipschitz(params.seed);
    let lambda_v = params.lambda_rel * adjoint_peak(&voxel, &data.data);
    let variants: [(&'static str, &SenseProblem, &ModelSpec); 3] =
        [("voxel", &voxel, &vspec), ("kspace", &plain, &kspec), ("kspace_centered", &centered, &kspec)];

    let truth = phantom.rasterize(n, params.dx, 4);
    let support: Vec<bool> = truth.iter().map(|v| v.norm() > 0.0).collect();
    let mut reports = Vec::new();
    for (name, problem, spec) in variants {
        let lambda =
            if name == "voxel" { lambda_v } else { rescale_lambda(lambda_v, lip_v, problem.lipschitz(params.seed)) };
        let cfg = SolveConfig {
            max_iters: params.max_iters,
            lambda,
            tol: params.tol,
            record_iterates: true,
            seed: params.seed,
            monotone: false,
        };
        let res = problem.solve(&cfg)?;
        let image = sense_image(&res.coefficients, spec)?;
        let snaps = res.iterate_snapshots.iter().map(|x| sense_image(x, spec)).collect::<kspace_core::Result<Vec<_>>>()?;
        let iters = iterations_to_ssim(&snaps, &image, n, n, CONVERGENCE_SSIM)?;
        let maps = convergence_maps(&snaps, &res.time_history, &image, n, n, CONVERGENCE_SSIM)?;
        let median = maps.median_iterations(|i| support[i]);
        if let Some(o) = out {
            o.image(&format!("img_{name}"), n, &image)?;
            let it: Vec<f64> = maps.iterations.iter().map(|&k| k as f64).collect();
            o.real_map(&format!("conv_iters_{name}"), n, &it)?;
            let secs: Vec<f64> = maps.seconds.iter().map(|&s| if s.is_finite() { s } else { -1.0 }).collect();
            o.real_map(&format!("conv_seconds_{name}"), n, &secs)?;
            res.write_history_csv(o.file(&format!("history_{name}.csv"))?)?;
        }
        log::info!(
            "{name}: lambda {lambda:.3e}, {} iterations, SSIM-0.95 at {iters:?}, {:.4} s/iter",
            res.iterations(),
            res.seconds_per_iteration()
        );
        reports.push(VariantReport {
            name,
            image,
            lambda,
            iterations_run: res.iterations(),
            iterations_to_ssim: iters,
            median_local_iterations: median,
            seconds_per_iteration: res.seconds_per_iteration(),
        });
    }

    let mut pairwise = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            pairwise.push((i, j, nrmse(&reports[i].image, &reports[j].image, |_| true)));
        }
    }
    if let Some(o) = out {
        o.image("img_truth", n, &truth)?;
        let mut w = o.csv("timing.csv")?;
        w.write_record([
            "variant",
            "lambda",
            "iterations_run",
            "iterations_to_ssim",
            "median_local_iterations",
            "seconds_per_iteration",
            "nrmse_vs_truth",
        ])?;
        for r in &reports {
            w.write_record([
                r.name.to_string(),
                r.lambda.to_string(),
                r.iterations_run.to_string(),
                r.iterations_to_ssim.map_or("none".to_string(), |k| k.to_string()),
                r.median_local_iterations.to_string(),
                r.seconds_per_iteration.to_string(),
                nrmse(&truth, &r.image, |_| true).to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = o.csv("nrmse.csv")?;
        w.write_record(["reference", "image", "nrmse"])?;
        for (i, j, e) in &pairwise {
            w.write_record([reports[*i].name, reports[*j].name, &e.to_string()])?;
        }
        w.flush()?;
    }
    Ok(SenseReport { truth, variants: reports, pairwise_nrmse: pairwise })
}
