//! Exact voxel-model operator `A[m, n] = exp(-i 2 pi k_m . x_n)`.
//!
//! The 2D matrix is never stored: each row factors into an x table and a y
//! table of size `N`, so memory is `O(M N)` while apply and adjoint cost
//! `O(M N^2)`.

use std::f64::consts::PI;

use faer::Mat;

use super::linear::LinearOperator;
use super::model::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

pub struct VoxelOperator {
    dims: Dims,
    n: usize,
    m: usize,
    /// `m * n + i` -> `exp(-i 2 pi kx_m x_i)`
    ex: Vec<C64>,
    ey: Vec<C64>,
}

/// Centered grid positions `n dx`, `n = -N/2 .. N/2-1`.
pub fn grid_positions(n: usize, dx: f64) -> Vec<f64> {
    let half = (n / 2) as i64;
    (-half..half).map(|i| i as f64 * dx).collect()
}

fn phase_table(coords: impl Iterator<Item = f64>, xs: &[f64]) -> Vec<C64> {
    let mut out = Vec::new();
    for k in coords {
        out.extend(xs.iter().map(|&x| C64::from_polar(1.0, -2.0 * PI * k * x)));
    }
    out
}

impl VoxelOperator {
    pub fn from_points(points: &[[f64; 2]], dims: Dims, n: usize, dx: f64) -> Self {
        let xs = grid_positions(n, dx);
        let ex = phase_table(points.iter().map(|p| p[0]), &xs);
        let ey = match dims {
            Dims::One => Vec::new(),
            Dims::Two => phase_table(points.iter().map(|p| p[1]), &xs),
        };
        VoxelOperator { dims, n, m: points.len(), ex, ey }
    }

    #[inline]
    fn row_x(&self, m: usize) -> &[C64] {
        &self.ex[m * self.n..(m + 1) * self.n]
    }

    #[inline]
    fn row_y(&self, m: usize) -> &[C64] {
        &self.ey[m * self.n..(m + 1) * self.n]
    }
}

/// Dense voxel-model operator for a trajectory.
pub fn build_voxel_operator(t: &Trajectory, spec: &ModelSpec) -> Result<VoxelOperator> {
    if spec.kind != ModelKind::Voxel {
        return Err(Error::invalid("voxel operator needs a voxel model spec"));
    }
    if spec.dims != t.dims() {
        return Err(Error::DimsMismatch {
            expected: spec.dims.count(),
            got: t.dims().count(),
        });
    }
    Ok(VoxelOperator::from_points(t.points(), spec.dims, spec.n, spec.dx))
}

impl LinearOperator for VoxelOperator {
    fn nrows(&self) -> usize {
        self.m
    }

    fn ncols(&self) -> usize {
        self.dims.grid_len(self.n)
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        match self.dims {
            Dims::One => {
                for (m, ym) in y.iter_mut().enumerate() {
                    *ym = self.row_x(m).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Dims::Two => {
                for (m, ym) in y.iter_mut().enumerate() {
                    let rx = self.row_x(m);
                    let ry = self.row_y(m);
                    let mut acc = C64::new(0.0, 0.0);
                    for (iy, wy) in ry.iter().enumerate() {
                        let row = &x[iy * n..(iy + 1) * n];
                        let inner: C64 = rx.iter().zip(row).map(|(a, b)| a * b).sum();
                        acc += wy * inner;
                    }
                    *ym = acc;
                }
            }
        }
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        let n = self.n;
        x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        match self.dims {
            Dims::One => {
                for (m, ym) in y.iter().enumerate() {
                    for (xi, a) in x.iter_mut().zip(self.row_x(m)) {
                        *xi += a.conj() * ym;
                    }
                }
            }
            Dims::Two => {
                let mut rxc = vec![C64::new(0.0, 0.0); n];
                for (m, ym) in y.iter().enumerate() {
                    for (r, a) in rxc.iter_mut().zip(self.row_x(m)) {
                        *r = a.conj() * ym;
                    }
                    for (iy, wy) in self.row_y(m).iter().enumerate() {
                        let w = wy.conj();
                        for (xi, r) in x[iy * n..(iy + 1) * n].iter_mut().zip(&rxc) {
                            *xi += w * r;
                        }
                    }
                }
            }
        }
    }

    fn to_dense(&self) -> Mat<C64> {
        let n = self.n;
        match self.dims {
            Dims::One => Mat::from_fn(self.m, n, |m, i| self.ex[m * n + i]),
            Dims::Two => Mat::from_fn(self.m, n * n, |m, j| {
                self.ex[m * n + j % n] * self.ey[m * n + j / n]
            }),
        }
    }
}

/// `F_v(k) = sum_n b_n exp(-i 2 pi k . x_n)` at arbitrary points.
pub fn evaluate_kspace_voxel(b: &[C64], points: &[[f64; 2]], spec: &ModelSpec) -> Result<Vec<C64>> {
    check_len(b, spec)?;
    Ok(VoxelOperator::from_points(points, spec.dims, spec.n, spec.dx).apply(b))
}

/// `F_v` on the uniform grid `k_j = j / (g dx)`, `j = -g/2 .. g/2-1` (x fastest
/// in 2D), by zero-padded FFT.
pub fn evaluate_kspace_voxel_grid(b: &[C64], spec: &ModelSpec, g: usize) -> Result<Vec<C64>> {
    check_len(b, spec)?;
    if g == 0 || g % 2 != 0 {
        return Err(Error::invalid(format!("evaluation grid must be even, got {g}")));
    }
    let n = spec.n;
    let half = (n / 2) as i64;
    let fft = GridFft::square(g, spec.dims);
    let mut buf = vec![C64::new(0.0, 0.0); fft.len()];
    match spec.dims {
        Dims::One => {
            for (i, v) in b.iter().enumerate() {
                buf[wrap(i as i64 - half, g)] += v;
            }
        }
        Dims::Two => {
            for iy in 0..n {
                let gy = wrap(iy as i64 - half, g);
                for ix in 0..n {
                    buf[gy * g + wrap(ix as i64 - half, g)] += b[iy * n + ix];
                }
            }
        }
    }
    fft.forward(&mut buf);
    Ok(recentre(&buf, g, spec.dims))
}

/// Reorders an FFT-ordered grid into centered order `j = -g/2 .. g/2-1`.
pub(crate) fn recentre(buf: &[C64], g: usize, dims: Dims) -> Vec<C64> {
    let half = (g / 2) as i64;
    match dims {
        Dims::One => (0..g).map(|j| buf[wrap(j as i64 - half, g)]).collect(),
        Dims::Two => {
            let mut out = Vec::with_capacity(g * g);
            for jy in 0..g {
                let sy = wrap(jy as i64 - half, g);
                for jx in 0..g {
                    out.push(buf[sy * g + wrap(jx as i64 - half, g)]);
                }
            }
            out
        }
    }
}

fn check_len(b: &[C64], spec: &ModelSpec) -> Result<()> {
    let expected = spec.dims.grid_len(spec.n);
    if b.len() != expected {
        return Err(Error::LengthMismatch {
            what: "voxel coefficients",
            expected,
            got: b.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linear::adjoint_mismatch;
    use crate::trajectory::{make_cartesian, make_spiral};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn cartesian_gives_orthogonal_columns() {
        let n = 8;
        let dx = 0.5;
        let spec = ModelSpec::voxel(Dims::Two, n, dx).unwrap();
        let t = make_cartesian(n, 1.0 / (n as f64 * dx), Dims::Two).unwrap();
        let a = build_voxel_operator(&t, &spec).unwrap().to_dense();
        let g = a.adjoint() * &a;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { (n * n) as f64 } else { 0.0 };
                assert!((g[(i, j)] - want).norm() < 1e-12 * (n * n) as f64);
            }
        }
    }

    #[test]
    fn zero_sample_row_is_ones() {
        let spec = ModelSpec::voxel(Dims::Two, 4, 1.0).unwrap();
        let t = Trajectory::new(Dims::Two, vec![[0.0, 0.0]], 0.0).unwrap();
        let a = build_voxel_operator(&t, &spec).unwrap().to_dense();
        for j in 0..16 {
            assert_eq!(a[(0, j)], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn adjoint_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = make_spiral(3, 40, 2.0, 0.5).unwrap();
        let spec = ModelSpec::voxel(Dims::Two, 10, 1.0).unwrap();
        let op = build_voxel_operator(&t, &spec).unwrap();
        for _ in 0..20 {
            let x = random_vec(&mut rng, op.ncols());
            let y = random_vec(&mut rng, op.nrows());
            assert!(adjoint_mismatch(&op, &x, &y) < 1e-12);
        }
    }

    #[test]
    fn structured_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = make_spiral(2, 30, 1.5, 0.5).unwrap();
        let spec = ModelSpec::voxel(Dims::Two, 6, 0.8).unwrap();
        let op = build_voxel_operator(&t, &spec).unwrap();
        let a = op.to_dense();
        let x = random_vec(&mut rng, op.ncols());
        let y = op.apply(&x);
        for m in 0..op.nrows() {
            let want: C64 = (0..op.ncols()).map(|j| a[(m, j)] * x[j]).sum();
            assert!((y[m] - want).norm() < 1e-12);
        }
        // direct formula for one entry
        let p = t.points()[7];
        let (ix, iy) = (4usize, 1usize);
        let xs = grid_positions(6, 0.8);
        let want = C64::from_polar(1.0, -2.0 * PI * (p[0] * xs[ix] + p[1] * xs[iy]));
        assert!((a[(7, iy * 6 + ix)] - want).norm() < 1e-14);
    }

    #[test]
    fn impulse_at_origin_is_flat() {
        let spec = ModelSpec::voxel(Dims::One, 8, 1.0).unwrap();
        let mut b = vec![C64::new(0.0, 0.0); 8];
        b[4] = C64::new(1.0, 0.0);
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.173 - 0.8, 0.0]).collect();
        for v in evaluate_kspace_voxel(&b, &pts, &spec).unwrap() {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn periodic_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dx = 0.7;
        let spec = ModelSpec::voxel(Dims::One, 16, dx).unwrap();
        let b = random_vec(&mut rng, 16);
        let pts: Vec<[f64; 2]> = (0..25).map(|i| [i as f64 * 0.05 - 0.6, 0.0]).collect();
        let shifted: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + 1.0 / dx, 0.0]).collect();
        let a = evaluate_kspace_voxel(&b, &pts, &spec).unwrap();
        let s = evaluate_kspace_voxel(&b, &shifted, &spec).unwrap();
        for (u, v) in a.iter().zip(&s) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn grid_fast_path_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dims in [Dims::One, Dims::Two] {
            let spec = ModelSpec::voxel(dims, 6, 1.3).unwrap();
            let b = random_vec(&mut rng, spec.ncols());
            for g in [6usize, 12, 4] {
                let fast = evaluate_kspace_voxel_grid(&b, &spec, g).unwrap();
                let ks: Vec<f64> = (0..g).map(|j| (j as f64 - (g / 2) as f64) / (g as f64 * 1.3)).collect();
                let pts: Vec<[f64; 2]> = match dims {
                    Dims::One => ks.iter().map(|&k| [k, 0.0]).collect(),
                    Dims::Two => ks.iter().flat_map(|&ky| ks.iter().map(move |&kx| [kx, ky])).collect(),
                };
                let direct = evaluate_kspace_voxel(&b, &pts, &spec).unwrap();
                for (u, v) in fast.iter().zip(&direct) {
                    assert!((u - v).norm() < 1e-12);
                }
            }
        }
    }
}
