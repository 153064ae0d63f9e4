//! Approximate voxel-model operator by Kaiser-Bessel gridding.
//!
//! Forward: scale by the deapodization, zero-pad onto an oversampled grid of
//! `G` points per axis, FFT, then interpolate to the samples with the KB
//! kernel. The adjoint runs the same steps transposed.
//!
//! The deapodization is the DTFT of the kernel sampled at integer offsets,
//! so samples that land on grid nodes are reproduced exactly.

use std::f64::consts::PI;

use super::kernels::KaiserBessel;
use super::linear::LinearOperator;
use super::model::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

pub struct GriddingOperator {
    dims: Dims,
    n: usize,
    g: usize,
    m: usize,
    fft: GridFft,
    /// CSR interpolation weights onto the (FFT-ordered) oversampled grid.
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    /// Inverse deapodization per axis index `0..N`.
    deapod: Vec<f64>,
}

fn axis_taps(u: f64, kb: &KaiserBessel, g: usize) -> Vec<(usize, f64)> {
    let half = kb.width / 2.0;
    let lo = (u - half).ceil() as i64;
    let hi = (u + half).floor() as i64;
    (lo..=hi)
        .map(|j| (wrap(j, g), kb.eval(u - j as f64)))
        .filter(|&(_, w)| w != 0.0)
        .collect()
}

pub fn build_gridding_operator(
    t: &Trajectory,
    spec: &ModelSpec,
    osf: f64,
    kernel_width: usize,
) -> Result<GriddingOperator> {
    if spec.kind != ModelKind::Voxel {
        return Err(Error::invalid("gridding approximates the voxel model only"));
    }
    if spec.dims != t.dims() {
        return Err(Error::DimsMismatch {
            expected: spec.dims.count(),
            got: t.dims().count(),
        });
    }
    if kernel_width < 2 {
        return Err(Error::invalid(format!("kernel width must be >= 2, got {kernel_width}")));
    }
    if !(osf.is_finite() && osf > 1.0) {
        return Err(Error::invalid(format!("oversampling must exceed 1, got {osf}")));
    }
    let n = spec.n;
    let mut g = (osf * n as f64).round() as usize;
    g += g % 2;
    let kb = KaiserBessel::for_oversampling(kernel_width, osf);
    // grid units: k g dx
    let scale = g as f64 * spec.dx;

    let mut row_ptr = Vec::with_capacity(t.len() + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut weights = Vec::new();
    for p in t.points() {
        let tx = axis_taps(p[0] * scale, &kb, g);
        match spec.dims {
            Dims::One => {
                for (c, w) in tx {
                    cols.push(c);
                    weights.push(w);
                }
            }
            Dims::Two => {
                let ty = axis_taps(p[1] * scale, &kb, g);
                for &(cy, wy) in &ty {
                    for &(cx, wx) in &tx {
                        cols.push(cy * g + cx);
                        weights.push(wx * wy);
                    }
                }
            }
        }
        row_ptr.push(cols.len());
    }

    // D(n) = sum over integer offsets s of phi(s) exp(i 2 pi n s / G)
    let reach = (kb.width / 2.0).floor() as i64;
    let half = (n / 2) as i64;
    let deapod = (0..n)
        .map(|i| {
            let idx = (i as i64 - half) as f64;
            let d: f64 = (-reach..=reach)
                .map(|s| kb.eval(s as f64) * (2.0 * PI * idx * s as f64 / g as f64).cos())
                .sum();
            1.0 / d
        })
        .collect();

    Ok(GriddingOperator {
        dims: spec.dims,
        n,
        g,
        m: t.len(),
        fft: GridFft::square(g, spec.dims),
        row_ptr,
        cols,
        weights,
        deapod,
    })
}

impl GriddingOperator {
    pub fn grid_size(&self) -> usize {
        self.g
    }
}

impl LinearOperator for GriddingOperator {
    fn nrows(&self) -> usize {
        self.m
    }

    fn ncols(&self) -> usize {
        self.dims.grid_len(self.n)
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let (n, g) = (self.n, self.g);
        let half = (n / 2) as i64;
        let mut buf = vec![C64::new(0.0, 0.0); self.fft.len()];
        match self.dims {
            Dims::One => {
                for i in 0..n {
                    buf[wrap(i as i64 - half, g)] = x[i] * self.deapod[i];
                }
            }
            Dims::Two => {
                for iy in 0..n {
                    let gy = wrap(iy as i64 - half, g) * g;
                    for ix in 0..n {
                        buf[gy + wrap(ix as i64 - half, g)] =
                            x[iy * n + ix] * (self.deapod[ix] * self.deapod[iy]);
                    }
                }
            }
        }
        self.fft.forward(&mut buf);
        for (m, ym) in y.iter_mut().enumerate() {
            let r = self.row_ptr[m]..self.row_ptr[m + 1];
            *ym = self.cols[r.clone()]
                .iter()
                .zip(&self.weights[r])
                .map(|(&c, &w)| buf[c] * w)
                .sum();
        }
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        let (n, g) = (self.n, self.g);
        let half = (n / 2) as i64;
        let mut buf = vec![C64::new(0.0, 0.0); self.fft.len()];
        for (m, ym) in y.iter().enumerate() {
            let r = self.row_ptr[m]..self.row_ptr[m + 1];
            for (&c, &w) in self.cols[r.clone()].iter().zip(&self.weights[r]) {
                buf[c] += ym * w;
            }
        }
        self.fft.inverse(&mut buf);
        match self.dims {
            Dims::One => {
                for i in 0..n {
                    x[i] = buf[wrap(i as i64 - half, g)] * self.deapod[i];
                }
            }
            Dims::Two => {
                for iy in 0..n {
                    let gy = wrap(iy as i64 - half, g) * g;
                    for ix in 0..n {
                        x[iy * n + ix] =
                            buf[gy + wrap(ix as i64 - half, g)] * (self.deapod[ix] * self.deapod[iy]);
                    }
                }
            }
        }
    }
}
