//! Planned FFTs over row-major 1D/2D grids.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::trajectory::Dims;
use crate::C64;

/// Forward and inverse unnormalized DFTs over an `ny x nx` row-major grid
/// (`ny == 1` for 1D).
///
/// Forward uses `exp(-i 2 pi j k / n)`, inverse `exp(+i 2 pi j k / n)`; neither
/// divides by the length.
#[derive(Clone)]
pub struct GridFft {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GridFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFft")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl GridFft {
    pub fn new(nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0, "empty FFT grid");
        let mut planner = FftPlanner::new();
        GridFft {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    /// Square grid of side `n` in `dims` dimensions.
    pub fn square(n: usize, dims: Dims) -> Self {
        match dims {
            Dims::One => Self::new(n, 1),
            Dims::Two => Self::new(n, n),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, &self.fwd_x, &self.fwd_y);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, &self.inv_x, &self.inv_y);
    }

    fn run(&self, data: &mut [C64], along_x: &Arc<dyn Fft<f64>>, along_y: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "FFT buffer length");
        along_x.process(data);
        if self.ny == 1 {
            return;
        }
        let (nx, ny) = (self.nx, self.ny);
        let mut cols = vec![C64::new(0.0, 0.0); nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                cols[ix * ny + iy] = data[iy * nx + ix];
            }
        }
        along_y.process(&mut cols);
        for ix in 0..nx {
            for iy in 0..ny {
                data[iy * nx + ix] = cols[ix * ny + iy];
            }
        }
    }
}

/// Storage slot of a (possibly negative) frequency or position index on a
/// periodic grid of length `n`.
#[inline]
pub fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft2(data: &[C64], nx: usize, ny: usize, sign: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); nx * ny];
        for ky in 0..ny {
            for kx in 0..nx {
                let mut acc = C64::new(0.0, 0.0);
                for y in 0..ny {
                    for x in 0..nx {
                        let ph = sign
                            * 2.0
                            * PI
                            * ((kx * x) as f64 / nx as f64 + (ky * y) as f64 / ny as f64);
                        acc += data[y * nx + x] * C64::from_polar(1.0, ph);
                    }
                }
                out[ky * nx + kx] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_on_rectangular_grid() {
        let (nx, ny) = (6, 4);
        let data: Vec<C64> = (0..nx * ny)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let fft = GridFft::new(nx, ny);
        for (sign, inverse) in [(-1.0, false), (1.0, true)] {
            let mut buf = data.clone();
            if inverse {
                fft.inverse(&mut buf);
            } else {
                fft.forward(&mut buf);
            }
            let want = naive_dft2(&data, nx, ny, sign);
            for (a, b) in buf.iter().zip(&want) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wrap_handles_negative_indices() {
        assert_eq!(wrap(-1, 8), 7);
        assert_eq!(wrap(-8, 8), 0);
        assert_eq!(wrap(9, 8), 1);
    }
}
