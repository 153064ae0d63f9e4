//! Anisotropic total variation on a 1D or 2D grid with Neumann boundaries.

use crate::C64;

/// Grid layout of the TV variable, x fastest. `ny = 1` for 1D signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TvShape {
    pub nx: usize,
    pub ny: usize,
}

impl TvShape {
    pub fn new(nx: usize, ny: usize) -> Self {
        TvShape { nx, ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn two_d(&self) -> bool {
        self.ny > 1
    }

    /// Length of `D x`.
    pub fn dual_len(&self) -> usize {
        if self.two_d() {
            2 * self.len()
        } else {
            self.len()
        }
    }

    /// Upper bound on `|D|^2`.
    pub fn lipschitz(&self) -> f64 {
        if self.two_d() {
            8.0
        } else {
            4.0
        }
    }

    /// Forward differences `[D_x x; D_y x]`, zero on the last column/row.
    pub fn grad(&self, x: &[C64], out: &mut [C64]) {
        let (nx, ny) = (self.nx, self.ny);
        let n = self.len();
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                out[i] = if ix + 1 < nx { x[i + 1] - x[i] } else { C64::new(0.0, 0.0) };
                if self.two_d() {
                    out[n + i] = if iy + 1 < ny { x[i + nx] - x[i] } else { C64::new(0.0, 0.0) };
                }
            }
        }
    }

    /// Adjoint of [`TvShape::grad`].
    pub fn grad_adjoint(&self, p: &[C64], out: &mut [C64]) {
        let (nx, ny) = (self.nx, self.ny);
        let n = self.len();
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                let mut v = C64::new(0.0, 0.0);
                if ix + 1 < nx {
                    v -= p[i];
                }
                if ix > 0 {
                    v += p[i - 1];
                }
                if self.two_d() {
                    if iy + 1 < ny {
                        v -= p[n + i];
                    }
                    if iy > 0 {
                        v += p[n + i - nx];
                    }
                }
                out[i] = v;
            }
        }
    }

    /// `|D x|_1` with complex moduli.
    pub fn norm(&self, x: &[C64]) -> f64 {
        let mut g = vec![C64::new(0.0, 0.0); self.dual_len()];
        self.grad(x, &mut g);
        g.iter().map(|v| v.norm()).sum()
    }
}

/// Proximal map of `gamma |D .|_1` by projected gradient on the dual, with the
/// dual variable kept between calls as a warm start.
pub(crate) struct TvProx {
    shape: TvShape,
    p: Vec<C64>,
    dp: Vec<C64>,
    g: Vec<C64>,
}

impl TvProx {
    pub fn new(shape: TvShape) -> Self {
        TvProx {
            shape,
            p: vec![C64::new(0.0, 0.0); shape.dual_len()],
            dp: vec![C64::new(0.0, 0.0); shape.len()],
            g: vec![C64::new(0.0, 0.0); shape.dual_len()],
        }
    }

    /// Writes `argmin_x 1/2 |x - v|^2 + gamma |D x|_1` (approximately) into `x`.
    pub fn apply(&mut self, v: &[C64], gamma: f64, iters: usize, x: &mut [C64]) {
        if gamma <= 0.0 {
            x.copy_from_slice(v);
            return;
        }
        let step = 1.0 / (gamma * self.shape.lipschitz());
        for _ in 0..iters {
            // x = v - gamma D^H p
            self.shape.grad_adjoint(&self.p, &mut self.dp);
            for ((xi, vi), di) in x.iter_mut().zip(v).zip(&self.dp) {
                *xi = vi - gamma * di;
            }
            self.shape.grad(x, &mut self.g);
            for (pi, gi) in self.p.iter_mut().zip(&self.g) {
                let q = *pi + step * gi;
                let m2 = q.norm_sqr();
                *pi = if m2 > 1.0 { q / m2.sqrt() } else { q };
            }
        }
        self.shape.grad_adjoint(&self.p, &mut self.dp);
        for ((xi, vi), di) in x.iter_mut().zip(v).zip(&self.dp) {
            *xi = vi - gamma * di;
        }
    }
}
