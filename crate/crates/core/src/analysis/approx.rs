//! Best-case L2 error of fitting a point-source sinusoid with each model.

use std::f64::consts::PI;
use std::io::Write;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::MinNormLstsq;
use crate::operators::{bspline, ModelKind, ModelSpec};
use crate::trajectory::Dims;
use crate::C64;

/// Refinement threshold between the Q and 2Q answers, in percentage points.
pub const REFINEMENT_TOL_PP: f64 = 0.05;
const RCOND: f64 = 1e-12;

/// Quadrature setup for the error integral over the central period
/// `[-1/(2 dx), 1/(2 dx))`.
#[derive(Clone, Copy, Debug)]
pub struct ApproxErrorSpec {
    pub model: ModelSpec,
    pub quad_nodes: usize,
    pub max_quad_nodes: usize,
}

impl ApproxErrorSpec {
    pub fn new(model: ModelSpec, quad_nodes: usize) -> Result<Self> {
        let spec = ApproxErrorSpec {
            model,
            quad_nodes,
            max_quad_nodes: 8 * quad_nodes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.dims != Dims::One {
            return Err(Error::invalid("approximation error is defined for 1D models"));
        }
        if self.quad_nodes < 512 {
            return Err(Error::invalid(format!("need at least 512 quadrature nodes, got {}", self.quad_nodes)));
        }
        if self.max_quad_nodes < self.quad_nodes {
            return Err(Error::invalid("max_quad_nodes below quad_nodes"));
        }
        Ok(())
    }

    fn with_model(&self, model: ModelSpec) -> Self {
        ApproxErrorSpec { model, ..*self }
    }
}

/// Value of basis function `j` of a 1D model at frequency `k`.
fn basis_value(spec: &ModelSpec, k: f64, j: usize) -> C64 {
    match spec.kind {
        ModelKind::Voxel => {
            let x = (j as f64 - (spec.n / 2) as f64) * spec.dx;
            C64::from_polar(1.0, -2.0 * PI * k * x)
        }
        ModelKind::KSpace => {
            let dk = spec.delta_k();
            let l = j as f64 - (spec.l() / 2) as f64;
            C64::new(bspline(spec.p, k / dk - l), 0.0)
        }
    }
}

fn quadrature_nodes(dx: f64, q: usize) -> Vec<f64> {
    (0..q).map(|j| -0.5 / dx + (j as f64 + 0.5) / (q as f64 * dx)).collect()
}

fn errors_at(spec: &ModelSpec, q: usize, x0s: &[f64]) -> Result<Vec<f64>> {
    let nodes = quadrature_nodes(spec.dx, q);
    let ncols = spec.basis_len();
    let basis = Mat::from_fn(q, ncols, |i, j| basis_value(spec, nodes[i], j));
    let fit = MinNormLstsq::new(&basis, RCOND)?;
    let targets = Mat::from_fn(q, x0s.len(), |i, j| C64::from_polar(1.0, -2.0 * PI * nodes[i] * x0s[j]));
    let res = fit.residual_norms(&targets);
    // |F_x0| = 1 at every node
    let signal = (q as f64).sqrt();
    Ok(res.iter().map(|r| 100.0 * r / signal).collect())
}

/// Error sweep with the quadrature size that passed refinement.
#[derive(Clone, Debug)]
pub struct ErrorSweep {
    pub x0: Vec<f64>,
    pub error_pct: Vec<f64>,
    pub quad_nodes: usize,
    pub refined: bool,
}

/// `E(x0)` in percent for every `x0`, refining the quadrature until the Q and
/// 2Q answers agree within 0.05 percentage points (or the cap is reached).
pub fn approx_error_sweep(x0s: &[f64], spec: &ApproxErrorSpec) -> Result<ErrorSweep> {
    spec.validate()?;
    let mut q = spec.quad_nodes;
    let mut coarse = errors_at(&spec.model, q, x0s)?;
    loop {
        let fine = errors_at(&spec.model, 2 * q, x0s)?;
        let gap = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if gap < REFINEMENT_TOL_PP {
            return Ok(ErrorSweep { x0: x0s.to_vec(), error_pct: fine, quad_nodes: 2 * q, refined: true });
        }
        if 4 * q > spec.max_quad_nodes {
            log::warn!("quadrature refinement stopped at Q = {} with a gap of {gap:.3} pp", 2 * q);
            return Ok(ErrorSweep { x0: x0s.to_vec(), error_pct: fine, quad_nodes: 2 * q, refined: false });
        }
        q *= 2;
        coarse = fine;
    }
}

pub fn approx_error(x0: f64, spec: &ApproxErrorSpec) -> Result<f64> {
    Ok(approx_error_sweep(&[x0], spec)?.error_pct[0])
}

/// `num` uniformly spaced points on `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, num: usize) -> Vec<f64> {
    match num {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..num).map(|i| a + (b - a) * i as f64 / (num - 1) as f64).collect(),
    }
}

/// Nominal range `[-N dx / 2, N dx / 2]` of shifts for the RMS error.
pub fn default_x0_range(model: &ModelSpec) -> [f64; 2] {
    let h = model.fov() / 2.0;
    [-h, h]
}

/// RMS of `E(x0)` over a uniform grid, trapezoid weighted.
pub fn rms_of_sweep(errors: &[f64]) -> f64 {
    let n = errors.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return errors[0].abs();
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, e) in errors.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        num += w * e * e;
        den += w;
    }
    (num / den).sqrt()
}

pub fn rms_approx_error(spec: &ApproxErrorSpec, x0_range: [f64; 2], num_x0: usize) -> Result<f64> {
    if num_x0 < 2 || !(x0_range[1] > x0_range[0]) {
        return Err(Error::invalid("need at least two x0 values over a nonempty range"));
    }
    let sweep = approx_error_sweep(&linspace(x0_range[0], x0_range[1], num_x0), spec)?;
    Ok(rms_of_sweep(&sweep.error_pct))
}

/// RMS error for every `(P, rho)` pair; rows follow `p_values`, columns
/// follow `rho_values`. The model kind of `base` is ignored.
pub fn rms_error_contour(
    p_values: &[usize],
    rho_values: &[f64],
    base: &ApproxErrorSpec,
    num_x0: usize,
) -> Result<Vec<Vec<f64>>> {
    let range = default_x0_range(&base.model);
    p_values
        .iter()
        .map(|&p| {
            rho_values
                .iter()
                .map(|&rho| {
                    let model = ModelSpec::kspace(Dims::One, base.model.n, base.model.dx, p, rho)?;
                    rms_approx_error(&base.with_model(model), range, num_x0)
                })
                .collect()
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(sweep: &ErrorSweep, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x0", "error_pct"])?;
    for (x, e) in sweep.x0.iter().zip(&sweep.error_pct) {
        wr.write_record([x.to_string(), e.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_contour_csv<W: Write>(p_values: &[usize], rho_values: &[f64], table: &[Vec<f64>], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["rho", "P", "rms_pct"])?;
    for (row, p) in table.iter().zip(p_values) {
        for (v, rho) in row.iter().zip(rho_values) {
            wr.write_record([rho.to_string(), p.to_string(), v.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Minimum-norm fit of a single unit sample at `k_star`, evaluated at `eval_k`.
///
/// The fit is `x = a^H / |a|^2` for the model row `a` at `k_star`, so the
/// response is the model's own interpolation kernel through that sample.
pub fn single_sample_response(spec: &ModelSpec, k_star: f64, eval_k: &[f64]) -> Result<Vec<C64>> {
    spec.validate()?;
    if spec.dims != Dims::One {
        return Err(Error::invalid("single-sample response is defined for 1D models"));
    }
    let ncols = spec.basis_len();
    let row: Vec<C64> = (0..ncols).map(|j| basis_value(spec, k_star, j)).collect();
    let norm2: f64 = row.iter().map(|v| v.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::invalid(format!("no basis function covers k = {k_star}")));
    }
    let coeffs: Vec<C64> = row.iter().map(|v| v.conj() / norm2).collect();
    Ok(eval_k
        .iter()
        .map(|&k| coeffs.iter().enumerate().map(|(j, c)| c * basis_value(spec, k, j)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn voxel() -> ApproxErrorSpec {
        ApproxErrorSpec::new(ModelSpec::voxel(Dims::One, 16, 1.0).unwrap(), 512).unwrap()
    }

    #[test]
    fn voxel_exact_on_grid() {
        let spec = voxel();
        for x0 in [0.0, 1.0, -3.0, 7.0] {
            assert!(approx_error(x0, &spec).unwrap() < 1e-8);
        }
    }

    #[test]
    fn voxel_error_grows_outside() {
        let spec = voxel();
        assert!(approx_error(0.75 * 16.0, &spec).unwrap() >= 50.0);
        assert!(approx_error(0.5, &spec).unwrap() > 1.0);
    }

    #[test]
    fn voxel_half_voxel_matches_closed_form() {
        // projecting onto N orthonormal exponentials over one period:
        // captured energy = sum_n sinc^2(x0 - n) over the grid
        let spec = voxel();
        let x0 = 0.5;
        let captured: f64 = (-8..8).map(|n| crate::phantom::sinc(x0 - n as f64).powi(2)).sum();
        let want = 100.0 * (1.0 - captured).sqrt();
        assert!((approx_error(x0, &spec).unwrap() - want).abs() < 0.05);
    }

    #[test]
    fn kspace_smaller_rms_than_voxel() {
        let v = voxel();
        let k = ApproxErrorSpec::new(ModelSpec::kspace(Dims::One, 16, 1.0, 3, 1.3).unwrap(), 512).unwrap();
        let range = default_x0_range(&v.model);
        assert!(rms_approx_error(&k, range, 65).unwrap() < rms_approx_error(&v, range, 65).unwrap());
    }

    #[test]
    fn trapezoid_rms() {
        assert!((rms_of_sweep(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
        // weights 1/2, 1, 1/2 on squares 0, 4, 0
        assert!((rms_of_sweep(&[0.0, 2.0, 0.0]) - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(linspace(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn single_sample_voxel_is_dirichlet() {
        let spec = ModelSpec::voxel(Dims::One, 8, 1.0).unwrap();
        let k = [0.1, 0.3, 1.3];
        let f = single_sample_response(&spec, 0.3, &k).unwrap();
        for (fi, &ki) in f.iter().zip(&k) {
            let want = crate::operators::dirichlet_kernel(ki - 0.3, 8, 1.0);
            assert!((fi.norm() - want.norm()).abs() < 1e-12);
        }
        assert!((f[1] - 1.0).norm() < 1e-12);
        assert!((f[2] - f[1]).norm() < 1e-12);
    }

    #[test]
    fn single_sample_kspace_is_local() {
        let spec = ModelSpec::kspace(Dims::One, 16, 1.0, 3, 1.3).unwrap();
        let dk = spec.delta_k();
        let ks = 0.2;
        let grid = linspace(-0.5, 0.5, 1001);
        let f = single_sample_response(&spec, ks, &grid).unwrap();
        for (v, k) in f.iter().zip(&grid) {
            if (k - ks).abs() > 4.0 * dk {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }
}
