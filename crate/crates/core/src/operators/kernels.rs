//! Scalar kernel functions shared by the operators.

use std::f64::consts::PI;

use crate::phantom::sinc;
use crate::C64;

/// Fourier-domain dual of the centered voxel grid,
/// `(1/N) sum_n exp(-i 2 pi n alpha k)` over `n = -N/2 .. N/2-1`,
/// which equals `(1/N) sin(pi N alpha k) / sin(pi alpha k) exp(i pi alpha k)`.
///
/// At the removable singularities `k = j / alpha` the limit is used.
pub fn dirichlet_kernel(k: f64, n: usize, alpha: f64) -> C64 {
    let u = PI * alpha * k;
    let s = u.sin();
    let nf = n as f64;
    let ratio = if s.abs() < 1e-9 {
        // sin(N u) / (N sin u) -> cos(N u) / cos(u) at u = j pi
        (nf * u).cos() / u.cos()
    } else {
        (nf * u).sin() / (nf * s)
    };
    C64::from_polar(ratio, u)
}

/// Centered B-spline of degree `p` (the `(p+1)`-fold self-convolution of the
/// unit rect).
///
/// Degree 0 is taken on the half-open interval `[-1/2, 1/2)`; for `p >= 1`
/// the value is exactly zero for `|t| >= (p+1)/2`.
pub fn bspline(p: usize, t: f64) -> f64 {
    if p == 0 {
        return if (-0.5..0.5).contains(&t) { 1.0 } else { 0.0 };
    }
    let half = (p as f64 + 1.0) / 2.0;
    if t.abs() >= half {
        return 0.0;
    }
    ((half + t) * bspline(p - 1, t + 0.5) + (half - t) * bspline(p - 1, t - 0.5)) / p as f64
}

/// Image-domain dual of the degree-`p` k-space basis scaled by `delta_k`:
/// `delta_k sinc(x delta_k)^(p+1)`.
pub fn psi_image(x: f64, p: usize, delta_k: f64) -> f64 {
    delta_k * sinc(x * delta_k).powi(p as i32 + 1)
}

/// Modified Bessel function of the first kind, order 0, by power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while term > sum * 1e-17 {
        term *= q / (m * m);
        sum += term;
        m += 1.0;
    }
    sum
}

/// Kaiser-Bessel gridding kernel of total width `width` grid cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KaiserBessel {
    pub width: f64,
    pub beta: f64,
}

impl KaiserBessel {
    /// Standard shape parameter for oversampling ratio `osf`.
    pub fn for_oversampling(width: usize, osf: f64) -> Self {
        let w = width as f64;
        let beta = PI * ((w / osf).powi(2) * (osf - 0.5).powi(2) - 0.8).sqrt();
        KaiserBessel { width: w, beta }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let r = 2.0 * t / self.width;
        if r.abs() > 1.0 {
            0.0
        } else {
            bessel_i0(self.beta * (1.0 - r * r).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_values() {
        assert!((dirichlet_kernel(0.0, 8, 1.0) - 1.0).norm() < 1e-15);
        assert!((dirichlet_kernel(1.0, 8, 1.0) - 1.0).norm() < 1e-14);
        assert!((dirichlet_kernel(-3.0, 6, 0.5) - dirichlet_kernel(-1.0, 6, 0.5)).norm() < 1e-13);
        assert!(dirichlet_kernel(0.5, 4, 1.0).norm() < 1e-15);
    }

    #[test]
    fn dirichlet_matches_sum() {
        for &(k, n, alpha) in &[(0.137, 8usize, 1.0), (-0.71, 16, 0.5), (2.3, 10, 0.25)] {
            let half = (n / 2) as i64;
            let sum: C64 = (-half..half)
                .map(|j| C64::from_polar(1.0, -2.0 * PI * j as f64 * alpha * k))
                .sum::<C64>()
                / n as f64;
            assert!((dirichlet_kernel(k, n, alpha) - sum).norm() < 1e-13);
        }
    }

    #[test]
    fn bspline_examples() {
        assert_eq!(bspline(0, 0.25), 1.0);
        assert_eq!(bspline(0, 0.75), 0.0);
        assert_eq!(bspline(0, -0.5), 1.0);
        assert_eq!(bspline(0, 0.5), 0.0);
        assert_eq!(bspline(1, 0.0), 1.0);
        assert_eq!(bspline(1, 0.5), 0.5);
        assert_eq!(bspline(3, 2.0), 0.0);
        assert!((bspline(3, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((bspline(3, 1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn bspline_cubic_center_by_convolution() {
        // four-fold numerical convolution of the unit rect, read at 0
        let h = 1e-3;
        let n = (1.0 / h) as usize;
        let rect = vec![1.0; n];
        let mut acc: Vec<f64> = rect.clone();
        for _ in 0..3 {
            let mut out = vec![0.0; acc.len() + n - 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, r) in rect.iter().enumerate() {
                    out[i + j] += a * r * h;
                }
            }
            acc = out;
        }
        let centre = acc[(acc.len() - 1) / 2];
        assert!((centre - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn bspline_partition_of_unity() {
        for p in 1..6 {
            for i in 0..50 {
                let t = -0.5 + i as f64 / 50.0;
                let s: f64 = (-10..=10).map(|l| bspline(p, t - l as f64)).sum();
                assert!((s - 1.0).abs() < 1e-13, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_image(0.0, 3, 0.2), 0.2);
        assert!(psi_image(1.0 / 0.2, 3, 0.2).abs() < 1e-15);
    }

    #[test]
    fn psi_is_fourier_transform_of_bspline() {
        // inverse transform of bspline(P, k/dk) by the midpoint rule
        let dk = 0.37;
        for p in [0usize, 1, 3] {
            for &x in &[0.0, 0.8, 2.1, -3.3] {
                let support = (p as f64 + 1.0) / 2.0 * dk;
                let n = 20_000;
                let h = 2.0 * support / n as f64;
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    let k = -support + (i as f64 + 0.5) * h;
                    acc += C64::from_polar(bspline(p, k / dk) * h, 2.0 * PI * k * x);
                }
                assert!((acc.re - psi_image(x, p, dk)).abs() < 1e-6, "p={p} x={x}");
                assert!(acc.im.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn i0_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i0(10.0) / 2815.716_628_466_254 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kb_beta_for_width_four() {
        let kb = KaiserBessel::for_oversampling(4, 2.0);
        assert!((kb.beta - 8.9962).abs() < 1e-3);
        assert_eq!(kb.eval(2.5), 0.0);
        assert!(kb.eval(0.0) > kb.eval(1.0));
    }
}
