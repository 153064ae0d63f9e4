//! Multichannel (SENSE) simulation and SENSE+TV reconstruction for both
//! models.
//!
//! Channel `q` sees the image weighted by its sensitivity `s_q(x)`. The voxel
//! formulation optimizes the voxel coefficients `b` through `A S_q`. The
//! k-space formulation optimizes image samples `f` on the `L`-point grid of
//! spacing `dx` and maps them to k-space coefficients with
//! `c_q = Phi_q F Y_q^{-1} S_q f`, where `F` is the centered DFT,
//! `Y_q = L^d psi(x + x0_q)` and `Phi_q = exp(-i 2 pi l dk . x0_q)`; channel
//! data are compared after the centering phase `W_q`.
//!
//! Noise is assumed i.i.d. across channels (prewhitened data).

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::crop_center;
use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::operators::{
    build_gridding_operator, build_kspace_operator, build_voxel_operator, centering_weights, grid_positions,
    psi_image, LinearOperator, ModelKind, ModelSpec, SparseMatrix, VoxelOperator,
};
use crate::phantom::{sinc, EllipsePhantom};
use crate::solvers::TvShape;
use crate::solvers::{fista_tv, power_iteration_gram, tv_objective, ReconResult, SolveConfig, StackedGram};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

/// Fine-grid refinement threshold for simulated data (relative).
pub const SIMULATION_REFINE_TOL: f64 = 1e-3;
/// Smallest `|psi|` accepted inside the nominal FOV.
pub const PSI_GUARD: f64 = 1e-8;
const SIMULATION_SUPERSAMPLE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Flat,
    Gaussian {
        center: [f64; 2],
        width: f64,
        phase: f64,
        ramp: [f64; 2],
    },
}

/// Analytic coil sensitivities: Gaussian magnitude bumps around the FOV with
/// smooth linear phase.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityMaps {
    dims: Dims,
    profiles: Vec<Profile>,
    gain: f64,
}

impl SensitivityMaps {
    /// `q` all-ones maps.
    pub fn flat(dims: Dims, q: usize) -> Self {
        SensitivityMaps { dims, profiles: vec![Profile::Flat; q], gain: 1.0 }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.profiles.len()
    }

    /// The same maps multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        SensitivityMaps { gain: self.gain * gain, ..self.clone() }
    }

    /// The maps of the selected channels.
    pub fn subset(&self, channels: &[usize]) -> Self {
        SensitivityMaps { profiles: channels.iter().map(|&q| self.profiles[q].clone()).collect(), ..self.clone() }
    }

    pub fn value(&self, q: usize, x: [f64; 2]) -> C64 {
        self.gain * self.profile_value(q, x)
    }

    fn profile_value(&self, q: usize, x: [f64; 2]) -> C64 {
        match &self.profiles[q] {
            Profile::Flat => C64::new(1.0, 0.0),
            Profile::Gaussian { center, width, phase, ramp } => {
                let dx = x[0] - center[0];
                let dy = if self.dims == Dims::Two { x[1] - center[1] } else { 0.0 };
                let mag = (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
                C64::from_polar(mag, phase + ramp[0] * x[0] + ramp[1] * x[1])
            }
        }
    }

    /// Map `q` at the positions `x_j = (j - g/2) step` (x fastest in 2D).
    pub fn on_grid(&self, q: usize, g: usize, step: f64) -> Vec<C64> {
        let xs = grid_positions(g, step);
        match self.dims {
            Dims::One => xs.iter().map(|&x| self.value(q, [x, 0.0])).collect(),
            Dims::Two => xs
                .iter()
                .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
                .map(|p| self.value(q, p))
                .collect(),
        }
    }
}

/// `q` Gaussian profiles centered on a circle of radius `fov/2` at equally
/// spaced angles, of width `smoothness * fov`, with a random phase offset and
/// a linear phase ramp of at most half a cycle across the FOV.
pub fn make_sensitivities(dims: Dims, q: usize, fov: f64, smoothness: f64, seed: u64) -> Result<SensitivityMaps> {
    if q == 0 {
        return Err(Error::invalid("need at least one channel"));
    }
    if !(smoothness > 0.0 && fov > 0.0) {
        return Err(Error::invalid("smoothness and fov must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_ramp = PI / fov;
    let profiles = (0..q)
        .map(|i| {
            let angle = 2.0 * PI * i as f64 / q as f64;
            let center = match dims {
                Dims::One => [if i % 2 == 0 { -0.5 } else { 0.5 } * fov, 0.0],
                Dims::Two => [0.5 * fov * angle.cos(), 0.5 * fov * angle.sin()],
            };
            Profile::Gaussian {
                center,
                width: smoothness * fov,
                phase: rng.random_range(-PI..PI),
                ramp: [
                    rng.random_range(-max_ramp..max_ramp),
                    if dims == Dims::Two { rng.random_range(-max_ramp..max_ramp) } else { 0.0 },
                ],
            }
        })
        .collect();
    Ok(SensitivityMaps { dims, profiles, gain: 1.0 })
}

/// Per-channel samples on a shared trajectory.
#[derive(Clone, Debug)]
pub struct ChannelData {
    pub trajectory: Trajectory,
    pub data: Vec<Vec<C64>>,
}

impl ChannelData {
    pub fn new(trajectory: Trajectory, data: Vec<Vec<C64>>) -> Result<Self> {
        for d in &data {
            if d.len() != trajectory.len() {
                return Err(Error::LengthMismatch { what: "channel data", expected: trajectory.len(), got: d.len() });
            }
        }
        Ok(ChannelData { trajectory, data })
    }

    pub fn channels(&self) -> usize {
        self.data.len()
    }

    /// Adds i.i.d. circular Gaussian noise with a different stream per channel.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(q, d)| crate::phantom::add_noise(d, sigma, seed.wrapping_add(q as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelData { trajectory: self.trajectory.clone(), data })
    }

    /// CSV `channel,kx[,ky],re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let two = self.trajectory.dims() == Dims::Two;
        if two {
            wr.write_record(["channel", "kx", "ky", "re", "im"])?;
        } else {
            wr.write_record(["channel", "kx", "re", "im"])?;
        }
        for (q, d) in self.data.iter().enumerate() {
            for (k, v) in self.trajectory.points().iter().zip(d) {
                let mut rec = vec![q.to_string(), k[0].to_string()];
                if two {
                    rec.push(k[1].to_string());
                }
                rec.push(v.re.to_string());
                rec.push(v.im.to_string());
                wr.write_record(&rec)?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn simulate_on(p: &EllipsePhantom, s: &SensitivityMaps, t: &Trajectory, g: usize, step: f64, channels: usize) -> Vec<Vec<C64>> {
    let img = p.rasterize(g, step, SIMULATION_SUPERSAMPLE);
    let vol = step.powi(s.dims().count() as i32);
    let op = VoxelOperator::from_points(t.points(), t.dims(), g, step);
    // pixel averages carry the transform of the pixel box
    let box_gain: Vec<f64> = t
        .points()
        .iter()
        .map(|k| match t.dims() {
            Dims::One => sinc(k[0] * step),
            Dims::Two => sinc(k[0] * step) * sinc(k[1] * step),
        })
        .collect();
    (0..channels)
        .map(|q| {
            let w: Vec<C64> = s.on_grid(q, g, step).iter().zip(&img).map(|(a, b)| a * b * vol).collect();
            op.apply(&w).iter().zip(&box_gain).map(|(v, b)| v / b).collect()
        })
        .collect()
}

/// Samples `s_q f` at the trajectory by a Fourier sum over pixel averages of
/// the phantom (deconvolved by the pixel box) on a fine grid covering `[-fov/2, fov/2)` with `fine` points
/// per axis. The first channel is recomputed on a grid twice as fine and a
/// warning is logged when the relative change exceeds 1e-3.
pub fn simulate_multichannel(
    p: &EllipsePhantom,
    s: &SensitivityMaps,
    t: &Trajectory,
    fov: f64,
    fine: usize,
) -> Result<ChannelData> {
    if p.dims() != t.dims() || s.dims() != t.dims() {
        return Err(Error::DimsMismatch { expected: t.dims().count(), got: p.dims().count() });
    }
    if fine < 2 || fine % 2 != 0 {
        return Err(Error::invalid(format!("fine grid must be even, got {fine}")));
    }
    let data = simulate_on(p, s, t, fine, fov / fine as f64, s.channels());
    let check = simulate_on(p, s, t, 2 * fine, fov / (2 * fine) as f64, 1);
    let diff: f64 = data[0].iter().zip(&check[0]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let norm: f64 = check[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 && diff / norm > SIMULATION_REFINE_TOL {
        log::warn!(
            "multichannel simulation changes by {:.2e} (relative) when the {fine}-point grid is refined",
            diff / norm
        );
    }
    ChannelData::new(t.clone(), data)
}

/// Magnitude-weighted mean position of a map sampled at `x_j = (j - g/2) dx`.
pub fn channel_centroid(map: &[C64], g: usize, dx: f64, dims: Dims) -> Result<[f64; 2]> {
    if map.len() != dims.grid_len(g) {
        return Err(Error::LengthMismatch { what: "map", expected: dims.grid_len(g), got: map.len() });
    }
    let xs = grid_positions(g, dx);
    let (mut sx, mut sy, mut w) = (0.0, 0.0, 0.0);
    for (i, v) in map.iter().enumerate() {
        let a = v.norm();
        sx += a * xs[i % g];
        if dims == Dims::Two {
            sy += a * xs[i / g];
        }
        w += a;
    }
    if w == 0.0 {
        return Err(Error::invalid("map is identically zero"));
    }
    Ok([sx / w, sy / w])
}

/// `x -> A (diag x)`: an operator with its columns scaled.
pub struct ScaledColumns {
    op: Arc<dyn LinearOperator>,
    diag: Vec<C64>,
}

impl ScaledColumns {
    pub fn new(op: Arc<dyn LinearOperator>, diag: Vec<C64>) -> Result<Self> {
        if diag.len() != op.ncols() {
            return Err(Error::LengthMismatch { what: "column scaling", expected: op.ncols(), got: diag.len() });
        }
        Ok(ScaledColumns { op, diag })
    }
}

impl LinearOperator for ScaledColumns {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }

    fn ncols(&self) -> usize {
        self.op.ncols()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let sx: Vec<C64> = x.iter().zip(&self.diag).map(|(a, b)| a * b).collect();
        self.op.apply_into(&sx, y);
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        self.op.adjoint_into(y, x);
        for (a, b) in x.iter_mut().zip(&self.diag) {
            *a *= b.conj();
        }
    }
}

/// `f -> H Phi F diag(weights) f` for one channel of the k-space formulation,
/// with `weights = s_q / Y_q`.
pub struct KSpaceChannelOperator {
    h: Arc<SparseMatrix>,
    fft: GridFft,
    /// FFT slot of each centered grid index.
    perm: Vec<usize>,
    weights: Vec<C64>,
    phase: Vec<C64>,
}

impl KSpaceChannelOperator {
    fn to_coefficients(&self, f: &[C64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.fft.len()];
        for ((&slot, v), w) in self.perm.iter().zip(f).zip(&self.weights) {
            buf[slot] = v * w;
        }
        self.fft.forward(&mut buf);
        self.perm.iter().zip(&self.phase).map(|(&slot, p)| buf[slot] * p).collect()
    }

    fn from_coefficients(&self, c: &[C64], f: &mut [C64]) {
        let mut buf = vec![C64::new(0.0, 0.0); self.fft.len()];
        for ((&slot, v), p) in self.perm.iter().zip(c).zip(&self.phase) {
            buf[slot] = v * p.conj();
        }
        self.fft.inverse(&mut buf);
        for ((fi, &slot), w) in f.iter_mut().zip(&self.perm).zip(&self.weights) {
            *fi = buf[slot] * w.conj();
        }
    }
}

impl LinearOperator for KSpaceChannelOperator {
    fn nrows(&self) -> usize {
        self.h.nrows()
    }

    fn ncols(&self) -> usize {
        self.weights.len()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let c = self.to_coefficients(x);
        self.h.apply_into(&c, y);
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        let c = self.h.adjoint(y);
        self.from_coefficients(&c, x);
    }
}

/// Builds the channel operator of the k-space formulation for map values
/// `map` on the `L`-point image grid and centering `x0`.
///
/// Grid points where `|psi(x + x0)| < 1e-8` are removed from the variable
/// (zero weight) when they lie outside the nominal FOV; inside it they are
/// an error.
pub fn kspace_channel_operator(
    h: Arc<SparseMatrix>,
    spec: &ModelSpec,
    map: &[C64],
    x0: [f64; 2],
) -> Result<KSpaceChannelOperator> {
    let l = spec.l();
    let dims = spec.dims;
    if map.len() != dims.grid_len(l) {
        return Err(Error::LengthMismatch { what: "map on the k-space image grid", expected: dims.grid_len(l), got: map.len() });
    }
    let dk = spec.delta_k();
    let xs = grid_positions(l, spec.dx);
    let half_fov = spec.fov() / 2.0;
    let scale = (l as f64).powi(dims.count() as i32);
    let axis_psi = |x: f64, shift: f64| psi_image(x + shift, spec.p, dk);
    let mut weights = Vec::with_capacity(map.len());
    for (i, s) in map.iter().enumerate() {
        let (x, y) = match dims {
            Dims::One => (xs[i], 0.0),
            Dims::Two => (xs[i % l], xs[i / l]),
        };
        let psi = match dims {
            Dims::One => axis_psi(x, x0[0]),
            Dims::Two => axis_psi(x, x0[0]) * axis_psi(y, x0[1]),
        };
        let y_val = scale * psi;
        if psi.abs() < PSI_GUARD {
            let inside = x.abs() <= half_fov && (dims == Dims::One || y.abs() <= half_fov);
            if inside {
                return Err(Error::VanishingWeight { value: psi, position: [x, y] });
            }
            weights.push(C64::new(0.0, 0.0));
        } else {
            weights.push(s / y_val);
        }
    }
    let half = (l / 2) as i64;
    let phase_axis: Vec<f64> = (0..l).map(|i| (i as i64 - half) as f64 * dk).collect();
    let phase = (0..dims.grid_len(l))
        .map(|i| {
            let arg = match dims {
                Dims::One => phase_axis[i] * x0[0],
                Dims::Two => phase_axis[i % l] * x0[0] + phase_axis[i / l] * x0[1],
            };
            C64::from_polar(1.0, -2.0 * PI * arg)
        })
        .collect();
    let perm = (0..dims.grid_len(l))
        .map(|i| match dims {
            Dims::One => wrap(i as i64 - half, l),
            Dims::Two => wrap((i / l) as i64 - half, l) * l + wrap((i % l) as i64 - half, l),
        })
        .collect();
    Ok(KSpaceChannelOperator { h, fft: GridFft::square(l, dims), perm, weights, phase })
}

/// How the voxel model's forward map is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoxelBackend {
    Exact,
    /// Kaiser-Bessel gridding, oversampling 2, width 4.
    Gridding,
}

/// Per-channel centering of the k-space formulation.
#[derive(Clone, Debug, PartialEq)]
pub enum Centering {
    None,
    PerChannel(Vec<[f64; 2]>),
}

/// Per-channel operators, targets and TV grid of one SENSE+TV formulation.
pub struct SenseProblem {
    ops: Vec<Box<dyn LinearOperator>>,
    targets: Vec<Vec<C64>>,
    shape: TvShape,
}

impl SenseProblem {
    pub fn channels(&self) -> usize {
        self.ops.len()
    }

    pub fn shape(&self) -> TvShape {
        self.shape
    }

    pub fn operator(&self, q: usize) -> &dyn LinearOperator {
        self.ops[q].as_ref()
    }

    fn views(&self) -> (Vec<&dyn LinearOperator>, Vec<&[C64]>) {
        (
            self.ops.iter().map(|o| o.as_ref()).collect(),
            self.targets.iter().map(|v| v.as_slice()).collect(),
        )
    }

    /// `2 sigma_max^2` of the stacked channel operators (30 power iterations).
    pub fn lipschitz(&self, seed: u64) -> f64 {
        let (ops, _) = self.views();
        2.0 * power_iteration_gram(&StackedGram::new(&ops), 30, seed).0
    }

    pub fn objective(&self, lambda: f64, x: &[C64]) -> f64 {
        let (ops, d) = self.views();
        tv_objective(&ops, &d, self.shape, lambda, x)
    }

    pub fn solve(&self, cfg: &SolveConfig) -> Result<ReconResult> {
        let (ops, d) = self.views();
        fista_tv(&ops, &d, self.shape, cfg)
    }
}

fn check_channels(data: &ChannelData, maps: &SensitivityMaps, spec: &ModelSpec) -> Result<()> {
    if data.channels() != maps.channels() {
        return Err(Error::LengthMismatch { what: "channels", expected: maps.channels(), got: data.channels() });
    }
    if data.trajectory.dims() != spec.dims || maps.dims() != spec.dims {
        return Err(Error::DimsMismatch { expected: spec.dims.count(), got: data.trajectory.dims().count() });
    }
    Ok(())
}

fn tv_shape(side: usize, dims: Dims) -> TvShape {
    match dims {
        Dims::One => TvShape::new(side, 1),
        Dims::Two => TvShape::new(side, side),
    }
}

/// Voxel formulation: `sum_q |A S_q b - d_q|^2 + lambda TV(b)` over the voxel
/// coefficients `b`.
pub fn voxel_sense_problem(
    data: &ChannelData,
    maps: &SensitivityMaps,
    spec: &ModelSpec,
    backend: VoxelBackend,
) -> Result<SenseProblem> {
    if spec.kind != ModelKind::Voxel {
        return Err(Error::invalid("voxel SENSE needs a voxel model spec"));
    }
    check_channels(data, maps, spec)?;
    let t = &data.trajectory;
    let base: Arc<dyn LinearOperator> = match backend {
        VoxelBackend::Exact => Arc::new(build_voxel_operator(t, spec)?),
        VoxelBackend::Gridding => Arc::new(build_gridding_operator(t, spec, 2.0, 4)?),
    };
    let ops = (0..maps.channels())
        .map(|q| {
            ScaledColumns::new(base.clone(), maps.on_grid(q, spec.n, spec.dx))
                .map(|o| Box::new(o) as Box<dyn LinearOperator>)
        })
        .collect::<Result<_>>()?;
    Ok(SenseProblem { ops, targets: data.data.clone(), shape: tv_shape(spec.n, spec.dims) })
}

/// k-space formulation: `sum_q |H Phi_q F Y_q^{-1} S_q f - W_q d_q|^2 +
/// lambda TV(f)` over image samples `f` on the `L`-point grid.
pub fn kspace_sense_problem(
    data: &ChannelData,
    maps: &SensitivityMaps,
    spec: &ModelSpec,
    centering: &Centering,
) -> Result<SenseProblem> {
    if spec.kind != ModelKind::KSpace {
        return Err(Error::invalid("k-space SENSE needs a k-space model spec"));
    }
    check_channels(data, maps, spec)?;
    let q = maps.channels();
    let shifts: Vec<[f64; 2]> = match centering {
        Centering::None => vec![[0.0; 2]; q],
        Centering::PerChannel(s) => {
            if s.len() != q {
                return Err(Error::LengthMismatch { what: "centering shifts", expected: q, got: s.len() });
            }
            s.clone()
        }
    };
    let t = &data.trajectory;
    let h = Arc::new(build_kspace_operator(t, spec)?);
    let l = spec.l();
    let ops = (0..q)
        .map(|c| {
            kspace_channel_operator(h.clone(), spec, &maps.on_grid(c, l, spec.dx), shifts[c])
                .map(|o| Box::new(o) as Box<dyn LinearOperator>)
        })
        .collect::<Result<_>>()?;
    let targets = data
        .data
        .iter()
        .zip(&shifts)
        .map(|(d, x0)| centering_weights(t, *x0).iter().zip(d).map(|(w, v)| w * v).collect())
        .collect();
    Ok(SenseProblem { ops, targets, shape: tv_shape(l, spec.dims) })
}

/// Per-channel centering shifts `x0_q = -centroid(s_q)`, which move each
/// coil image's centroid to the origin.
pub fn centroid_centering(maps: &SensitivityMaps, spec: &ModelSpec) -> Result<Centering> {
    let l = spec.l();
    let shifts = (0..maps.channels())
        .map(|q| channel_centroid(&maps.on_grid(q, l, spec.dx), l, spec.dx, spec.dims).map(|c| [-c[0], -c[1]]))
        .collect::<Result<_>>()?;
    Ok(Centering::PerChannel(shifts))
}

/// Voxel SENSE+TV with FISTA.
pub fn sense_tv_voxel(
    data: &ChannelData,
    maps: &SensitivityMaps,
    spec: &ModelSpec,
    backend: VoxelBackend,
    cfg: &SolveConfig,
) -> Result<ReconResult> {
    voxel_sense_problem(data, maps, spec, backend)?.solve(cfg)
}

/// k-space SENSE+TV with FISTA; the solution is the image-sample vector `f`.
pub fn sense_tv_kspace(
    data: &ChannelData,
    maps: &SensitivityMaps,
    spec: &ModelSpec,
    centering: &Centering,
    cfg: &SolveConfig,
) -> Result<ReconResult> {
    kspace_sense_problem(data, maps, spec, centering)?.solve(cfg)
}

/// Carries a regularization weight tuned for one formulation to another by
/// the ratio of their operator norms `sqrt(L_to / L_from)`, which equals the
/// change of variables between voxel coefficients and image samples.
pub fn rescale_lambda(lambda: f64, lipschitz_from: f64, lipschitz_to: f64) -> f64 {
    lambda * (lipschitz_to / lipschitz_from).sqrt()
}

/// Voxel coefficients as k-space image samples: `b / dx^d`, zero-padded to
/// the `L`-point grid.
pub fn voxel_to_kspace_variable(b: &[C64], voxel: &ModelSpec, kspace: &ModelSpec) -> Result<Vec<C64>> {
    let img = crate::analysis::model_image(b, voxel)?;
    let (n, l) = (voxel.n, kspace.l());
    if kspace.n != n || kspace.dims != voxel.dims {
        return Err(Error::invalid("models must share the nominal grid"));
    }
    let off = l / 2 - n / 2;
    let mut f = vec![C64::new(0.0, 0.0); voxel.dims.grid_len(l)];
    match voxel.dims {
        Dims::One => f[off..off + n].copy_from_slice(&img),
        Dims::Two => {
            for iy in 0..n {
                f[(iy + off) * l + off..(iy + off) * l + off + n].copy_from_slice(&img[iy * n..(iy + 1) * n]);
            }
        }
    }
    Ok(f)
}

/// k-space image samples as voxel coefficients: cropped and scaled by `dx^d`.
pub fn kspace_to_voxel_variable(f: &[C64], kspace: &ModelSpec) -> Result<Vec<C64>> {
    let vol = kspace.dx.powi(kspace.dims.count() as i32);
    Ok(sense_image(f, kspace)?.iter().map(|v| v * vol).collect())
}

/// Image of a SENSE+TV solution on the nominal `N`-point grid: voxel
/// coefficients divided by `dx^d`, k-space image samples cropped.
pub fn sense_image(x: &[C64], spec: &ModelSpec) -> Result<Vec<C64>> {
    match spec.kind {
        ModelKind::Voxel => crate::analysis::model_image(x, spec),
        ModelKind::KSpace => {
            let l = spec.l();
            if x.len() != spec.dims.grid_len(l) {
                return Err(Error::LengthMismatch { what: "image samples", expected: spec.dims.grid_len(l), got: x.len() });
            }
            Ok(crop_center(x, l, spec.n, spec.dims))
        }
    }
}
