//! Exact `A^H A` for the voxel model via circulant embedding.
//!
//! `(A^H A)[n, n'] = t(n - n')` with `t(p) = sum_m exp(i 2 pi k_m . p dx)`.
//! The Toeplitz kernel is embedded in a circulant of size `2N` per axis whose
//! spectrum is precomputed once; each product then costs one forward and one
//! inverse FFT on the `2N` grid, independent of the number of samples.

use std::f64::consts::PI;

use super::linear::GramOperator;
use super::model::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

pub struct ToeplitzGram {
    dims: Dims,
    n: usize,
    fft: GridFft,
    /// Circulant spectrum divided by the inverse-FFT normalization.
    spectrum: Vec<C64>,
}

pub fn build_toeplitz_gram(t: &Trajectory, spec: &ModelSpec) -> Result<ToeplitzGram> {
    if spec.kind != ModelKind::Voxel {
        return Err(Error::invalid("Toeplitz Gram is defined for the voxel model"));
    }
    if spec.dims != t.dims() {
        return Err(Error::DimsMismatch {
            expected: spec.dims.count(),
            got: t.dims().count(),
        });
    }
    let n = spec.n;
    let g = 2 * n;
    let acc = lag_sums(t, spec);
    let nl = 2 * n - 1;
    let half = n as i64 - 1;
    let mut kernel = vec![C64::new(0.0, 0.0); spec.dims.grid_len(g)];
    match spec.dims {
        Dims::One => {
            for (i, v) in acc.iter().enumerate() {
                kernel[wrap(i as i64 - half, g)] = *v;
            }
        }
        Dims::Two => {
            for j in 0..nl {
                let gy = wrap(j as i64 - half, g) * g;
                for i in 0..nl {
                    kernel[gy + wrap(i as i64 - half, g)] = acc[j * nl + i];
                }
            }
        }
    }
    let fft = GridFft::square(g, spec.dims);
    fft.forward(&mut kernel);
    let norm = 1.0 / kernel.len() as f64;
    kernel.iter_mut().for_each(|v| *v *= norm);
    Ok(ToeplitzGram { dims: spec.dims, n, fft, spectrum: kernel })
}

/// `t(p) = sum_m exp(i 2 pi k_m . p dx)` for lags `p in [-(N-1), N-1]^d`,
/// stored with `p + N - 1` as index (x fastest in 2D).
pub(crate) fn lag_sums(t: &Trajectory, spec: &ModelSpec) -> Vec<C64> {
    let n = spec.n;
    let lags: Vec<i64> = (-(n as i64) + 1..n as i64).collect();
    let phases = |k: f64| -> Vec<C64> {
        lags.iter()
            .map(|&p| C64::from_polar(1.0, 2.0 * PI * k * p as f64 * spec.dx))
            .collect()
    };
    let nl = lags.len();
    match spec.dims {
        Dims::One => {
            let mut acc = vec![C64::new(0.0, 0.0); nl];
            for pt in t.points() {
                for (a, v) in acc.iter_mut().zip(phases(pt[0])) {
                    *a += v;
                }
            }
            acc
        }
        Dims::Two => {
            let mut acc = vec![C64::new(0.0, 0.0); nl * nl];
            for pt in t.points() {
                let px = phases(pt[0]);
                let py = phases(pt[1]);
                for (j, vy) in py.iter().enumerate() {
                    let row = &mut acc[j * nl..(j + 1) * nl];
                    for (a, vx) in row.iter_mut().zip(&px) {
                        *a += vy * vx;
                    }
                }
            }
            acc
        }
    }
}

impl GramOperator for ToeplitzGram {
    fn dim(&self) -> usize {
        self.dims.grid_len(self.n)
    }

    fn gram_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        let g = 2 * n;
        let mut buf = vec![C64::new(0.0, 0.0); self.fft.len()];
        match self.dims {
            Dims::One => buf[..n].copy_from_slice(x),
            Dims::Two => {
                for iy in 0..n {
                    buf[iy * g..iy * g + n].copy_from_slice(&x[iy * n..(iy + 1) * n]);
                }
            }
        }
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        match self.dims {
            Dims::One => y.copy_from_slice(&buf[..n]),
            Dims::Two => {
                for iy in 0..n {
                    y[iy * n..(iy + 1) * n].copy_from_slice(&buf[iy * g..iy * g + n]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linear::{norm2, NormalOperator};
    use crate::operators::voxel::build_voxel_operator;
    use crate::trajectory::make_rosette;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_dense_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dims in [Dims::One, Dims::Two] {
            let spec = ModelSpec::voxel(dims, 10, 0.8).unwrap();
            let t = match dims {
                Dims::One => Trajectory::from_1d(
                    &(0..40).map(|_| rng.random_range(-0.6..0.6)).collect::<Vec<_>>(),
                    0.6,
                )
                .unwrap(),
                Dims::Two => make_rosette(5.0, 2.0, 300, 0.6).unwrap(),
            };
            let a = build_voxel_operator(&t, &spec).unwrap();
            let dense = NormalOperator::new(&a);
            let fast = build_toeplitz_gram(&t, &spec).unwrap();
            for _ in 0..5 {
                let x = random_vec(&mut rng, spec.ncols());
                let want = dense.gram(&x);
                let got = fast.gram(&x);
                let d: Vec<C64> = want.iter().zip(&got).map(|(a, b)| a - b).collect();
                assert!(norm2(&d) / norm2(&want) < 1e-10);
            }
        }
    }

    #[test]
    fn single_dc_sample_sums() {
        let spec = ModelSpec::voxel(Dims::Two, 4, 1.0).unwrap();
        let t = Trajectory::new(Dims::Two, vec![[0.0, 0.0]], 0.0).unwrap();
        let g = build_toeplitz_gram(&t, &spec).unwrap();
        let x: Vec<C64> = (0..16).map(|i| C64::new(i as f64, 1.0)).collect();
        let s: C64 = x.iter().sum();
        for v in g.gram(&x) {
            assert!((v - s).norm() < 1e-12);
        }
    }
}
