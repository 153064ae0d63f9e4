//! Compact-support k-space model: `F(k) = sum_l c_l zeta_P((k - l dk) / dk)`.

use std::f64::consts::PI;

use super::kernels::{bspline, psi_image};
use super::model::{ModelKind, ModelSpec};
use super::sparse::SparseMatrix;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

/// Nonzero basis weights along one axis for normalized position `u = k / dk`,
/// restricted to `l in [-L/2, L/2)`. Returned as `(l + L/2, weight)` ascending.
fn axis_weights(u: f64, p: usize, l: usize) -> Vec<(usize, f64)> {
    let half_support = (p as f64 + 1.0) / 2.0;
    let half_l = (l / 2) as i64;
    let lo = ((u - half_support).floor() as i64).max(-half_l);
    let hi = ((u + half_support).ceil() as i64).min(half_l - 1);
    let mut out = Vec::with_capacity(p + 1);
    for idx in lo..=hi {
        let w = bspline(p, u - idx as f64);
        if w != 0.0 {
            out.push(((idx + half_l) as usize, w));
        }
    }
    out
}

fn kspace_matrix(points: &[[f64; 2]], spec: &ModelSpec) -> SparseMatrix {
    let l = spec.l();
    let dk = spec.delta_k();
    let per_row = (spec.p + 1).pow(spec.dims.count() as u32);
    let mut h = SparseMatrix::with_capacity(spec.ncols(), points.len() * per_row);
    let mut outside = 0usize;
    let band = l as f64 * dk / 2.0;
    for pt in points {
        if pt[0] < -band || pt[0] >= band || (spec.dims == Dims::Two && (pt[1] < -band || pt[1] >= band)) {
            outside += 1;
        }
        let wx = axis_weights(pt[0] / dk, spec.p, l);
        match spec.dims {
            Dims::One => h.push_row(wx.iter().map(|&(c, w)| (c, C64::new(w, 0.0)))),
            Dims::Two => {
                let wy = axis_weights(pt[1] / dk, spec.p, l);
                h.push_row(wy.iter().flat_map(|&(cy, vy)| {
                    wx.iter().map(move |&(cx, vx)| (cy * l + cx, C64::new(vx * vy, 0.0)))
                }));
            }
        }
    }
    if outside > 0 {
        log::warn!(
            "{outside} of {} samples lie outside the k-space model band [-{band}, {band}); their rows are truncated",
            points.len()
        );
    }
    h
}

/// Sparse k-space model matrix `H[m, l] = zeta_P((k_m - l dk) / dk)`.
///
/// Columns are ordered row-major over `(l_y, l_x)` with `l_x` fastest.
pub fn build_kspace_operator(t: &Trajectory, spec: &ModelSpec) -> Result<SparseMatrix> {
    if spec.kind != ModelKind::KSpace {
        return Err(Error::invalid("k-space operator needs a k-space model spec"));
    }
    if spec.dims != t.dims() {
        return Err(Error::DimsMismatch {
            expected: spec.dims.count(),
            got: t.dims().count(),
        });
    }
    Ok(kspace_matrix(t.points(), spec))
}

/// `W_mm = exp(-i 2 pi k_m . x0)`.
pub fn centering_weights(t: &Trajectory, x0: [f64; 2]) -> Vec<C64> {
    t.points()
        .iter()
        .map(|k| C64::from_polar(1.0, -2.0 * PI * (k[0] * x0[0] + k[1] * x0[1])))
        .collect()
}

/// k-space model values `sum_l c_l zeta_P((k - l dk)/dk)` at arbitrary points.
pub fn evaluate_kspace_model(c: &[C64], points: &[[f64; 2]], spec: &ModelSpec) -> Result<Vec<C64>> {
    check_coeffs(c, spec)?;
    Ok(kspace_matrix(points, spec).apply(c))
}

/// Image-domain positions of an evaluation grid of `g` points spanning the
/// model FOV `[-1/(2 dk), 1/(2 dk))`.
pub fn image_grid_positions(g: usize, spec: &ModelSpec) -> Vec<f64> {
    let step = 1.0 / (spec.delta_k() * g as f64);
    let half = (g / 2) as i64;
    (0..g as i64).map(|j| (j - half) as f64 * step).collect()
}

/// Image `f(x) = psi(x + x0) sum_l c_l exp(i 2 pi l dk (x + x0))` on a uniform
/// grid of `grid_size` points per dimension covering the model FOV. With
/// `grid_size = L` the spacing equals `dx`.
pub fn evaluate_image_kspace_model(c: &[C64], grid_size: usize, spec: &ModelSpec) -> Result<Vec<C64>> {
    check_coeffs(c, spec)?;
    if grid_size == 0 {
        return Err(Error::invalid("grid_size must be at least 1"));
    }
    let g = grid_size;
    let l = spec.l();
    let half_l = (l / 2) as i64;
    let dk = spec.delta_k();
    let x0 = spec.x0;
    let phase = |idx: i64, shift: f64| C64::from_polar(1.0, 2.0 * PI * idx as f64 * dk * shift);
    let fft = GridFft::square(g, spec.dims);
    let mut buf = vec![C64::new(0.0, 0.0); fft.len()];
    match spec.dims {
        Dims::One => {
            for (i, v) in c.iter().enumerate() {
                let idx = i as i64 - half_l;
                buf[wrap(idx, g)] += v * phase(idx, x0[0]);
            }
        }
        Dims::Two => {
            for iy in 0..l {
                let ly = iy as i64 - half_l;
                let py = phase(ly, x0[1]);
                let gy = wrap(ly, g);
                for ix in 0..l {
                    let lx = ix as i64 - half_l;
                    buf[gy * g + wrap(lx, g)] += c[iy * l + ix] * py * phase(lx, x0[0]);
                }
            }
        }
    }
    fft.inverse(&mut buf);
    let mut img = super::voxel::recentre(&buf, g, spec.dims);
    let xs = image_grid_positions(g, spec);
    let px: Vec<f64> = xs.iter().map(|&x| psi_image(x + x0[0], spec.p, dk)).collect();
    match spec.dims {
        Dims::One => img.iter_mut().zip(&px).for_each(|(v, w)| *v *= w),
        Dims::Two => {
            let py: Vec<f64> = xs.iter().map(|&y| psi_image(y + x0[1], spec.p, dk)).collect();
            for jy in 0..g {
                for jx in 0..g {
                    img[jy * g + jx] *= px[jx] * py[jy];
                }
            }
        }
    }
    Ok(img)
}

fn check_coeffs(c: &[C64], spec: &ModelSpec) -> Result<()> {
    if spec.kind != ModelKind::KSpace {
        return Err(Error::invalid("expected a k-space model spec"));
    }
    if c.len() != spec.ncols() {
        return Err(Error::LengthMismatch {
            what: "k-space coefficients",
            expected: spec.ncols(),
            got: c.len(),
        });
    }
    Ok(())
}
