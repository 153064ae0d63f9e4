//! SSIM on magnitude images and the local convergence accounting built on it.

use crate::error::{Error, Result};
use crate::C64;

pub const SSIM_WINDOW: usize = 15;
pub const SSIM_SIGMA: f64 = 1.5;
pub const CONVERGENCE_SSIM: f64 = 0.95;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn gaussian_taps() -> Vec<f64> {
    let h = (SSIM_WINDOW / 2) as i64;
    (-h..=h).map(|k| (-(k * k) as f64 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()).collect()
}

/// Separable Gaussian local mean, with the window clipped at the borders and
/// renormalized. Axes of length 1 are not filtered.
fn local_mean(img: &[f64], nx: usize, ny: usize, taps: &[f64]) -> Vec<f64> {
    let h = (taps.len() / 2) as i64;
    let pass = |src: &[f64], len: usize, stride: usize, count: usize, outer_stride: usize| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        if len == 1 {
            out.copy_from_slice(src);
            return out;
        }
        for o in 0..count {
            let base = o * outer_stride;
            for i in 0..len as i64 {
                let (mut acc, mut wsum) = (0.0, 0.0);
                for (t, w) in taps.iter().enumerate() {
                    let j = i + t as i64 - h;
                    if j >= 0 && j < len as i64 {
                        acc += w * src[base + j as usize * stride];
                        wsum += w;
                    }
                }
                out[base + i as usize * stride] = acc / wsum;
            }
        }
        out
    };
    let rows = pass(img, nx, 1, ny, nx);
    pass(&rows, ny, nx, nx, 1)
}

fn check(reference: &[C64], img: &[C64], nx: usize, ny: usize) -> Result<()> {
    if nx * ny != reference.len() || reference.len() != img.len() {
        return Err(Error::LengthMismatch {
            what: "SSIM image",
            expected: nx * ny,
            got: if reference.len() != nx * ny { reference.len() } else { img.len() },
        });
    }
    Ok(())
}

/// Largest magnitude of an image.
pub fn max_magnitude(img: &[C64]) -> f64 {
    img.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Local SSIM at every pixel (x fastest), computed on magnitudes with a 15x15
/// Gaussian window (sigma 1.5). `range` defaults to the largest magnitude of
/// `reference`.
pub fn ssim_map(reference: &[C64], img: &[C64], nx: usize, ny: usize, range: Option<f64>) -> Result<Vec<f64>> {
    check(reference, img, nx, ny)?;
    let mut r = range.unwrap_or_else(|| max_magnitude(reference));
    if r == 0.0 {
        r = max_magnitude(img);
    }
    if r == 0.0 {
        return Ok(vec![1.0; reference.len()]);
    }
    let c1 = (K1 * r).powi(2);
    let c2 = (K2 * r).powi(2);
    let taps = gaussian_taps();
    let a: Vec<f64> = reference.iter().map(|v| v.norm()).collect();
    let b: Vec<f64> = img.iter().map(|v| v.norm()).collect();
    let prod = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p * q).collect() };
    let ma = local_mean(&a, nx, ny, &taps);
    let mb = local_mean(&b, nx, ny, &taps);
    let maa = local_mean(&prod(&a, &a), nx, ny, &taps);
    let mbb = local_mean(&prod(&b, &b), nx, ny, &taps);
    let mab = local_mean(&prod(&a, &b), nx, ny, &taps);
    Ok((0..a.len())
        .map(|i| {
            let va = maa[i] - ma[i] * ma[i];
            let vb = mbb[i] - mb[i] * mb[i];
            let cov = mab[i] - ma[i] * mb[i];
            ((2.0 * ma[i] * mb[i] + c1) * (2.0 * cov + c2))
                / ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2))
        })
        .collect())
}

/// Mean SSIM over the image.
pub fn ssim(reference: &[C64], img: &[C64], nx: usize, ny: usize, range: Option<f64>) -> Result<f64> {
    let m = ssim_map(reference, img, nx, ny, range)?;
    Ok(m.iter().sum::<f64>() / m.len() as f64)
}

/// Per-pixel convergence: the 1-based iteration (and cumulative time) from
/// which the local SSIM against the reference stays at or above the threshold
/// for every later snapshot. Pixels that never settle get `snapshots + 1` and
/// infinite time.
#[derive(Clone, Debug)]
pub struct ConvergenceMaps {
    pub iterations: Vec<usize>,
    pub seconds: Vec<f64>,
}

impl ConvergenceMaps {
    /// Median over the pixels selected by `mask`.
    pub fn median_iterations(&self, mask: impl Fn(usize) -> bool) -> f64 {
        let mut v: Vec<usize> = (0..self.iterations.len()).filter(|&i| mask(i)).map(|i| self.iterations[i]).collect();
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_unstable();
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2] as f64
        } else {
            (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
        }
    }
}

pub fn convergence_maps(
    snapshots: &[Vec<C64>],
    times: &[f64],
    reference: &[C64],
    nx: usize,
    ny: usize,
    threshold: f64,
) -> Result<ConvergenceMaps> {
    if snapshots.len() != times.len() {
        return Err(Error::LengthMismatch { what: "snapshot times", expected: snapshots.len(), got: times.len() });
    }
    let n = nx * ny;
    let range = max_magnitude(reference);
    let count = snapshots.len();
    // first index of the trailing run of passing snapshots
    let mut first_ok = vec![count; n];
    let mut settled = vec![true; n];
    for (s, snap) in snapshots.iter().enumerate().rev() {
        let map = ssim_map(reference, snap, nx, ny, Some(range))?;
        for i in 0..n {
            if settled[i] {
                if map[i] >= threshold {
                    first_ok[i] = s;
                } else {
                    settled[i] = false;
                }
            }
        }
        if !settled.iter().any(|&b| b) {
            break;
        }
    }
    let iterations = first_ok.iter().map(|&k| k + 1).collect();
    let seconds = first_ok.iter().map(|&k| if k < count { times[k] } else { f64::INFINITY }).collect();
    Ok(ConvergenceMaps { iterations, seconds })
}

/// 1-based iteration from which the global SSIM against the reference stays
/// at or above `threshold`; `None` if the final snapshot fails.
pub fn iterations_to_ssim(
    snapshots: &[Vec<C64>],
    reference: &[C64],
    nx: usize,
    ny: usize,
    threshold: f64,
) -> Result<Option<usize>> {
    let range = max_magnitude(reference);
    let mut first_ok = None;
    for (s, snap) in snapshots.iter().enumerate().rev() {
        if ssim(reference, snap, nx, ny, Some(range))? >= threshold {
            first_ok = Some(s + 1);
        } else {
            break;
        }
    }
    Ok(first_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_img(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5))).collect()
    }

    #[test]
    fn identical_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_img(&mut rng, 20 * 17);
        assert!((ssim(&x, &x, 20, 17, None).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_image_scores_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_img(&mut rng, 400);
        let z = vec![C64::new(0.0, 0.0); 400];
        assert!(ssim(&x, &z, 20, 20, None).unwrap() < 0.1);
    }

    #[test]
    fn symmetric_with_fixed_range_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = random_img(&mut rng, 16 * 16);
            let b = random_img(&mut rng, 16 * 16);
            let ab = ssim(&a, &b, 16, 16, Some(1.2)).unwrap();
            let ba = ssim(&b, &a, 16, 16, Some(1.2)).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!((-1.0..1.0).contains(&ab));
        }
    }

    #[test]
    fn window_average_of_constant_is_constant() {
        let taps = gaussian_taps();
        let m = local_mean(&vec![3.0; 30 * 7], 30, 7, &taps);
        assert!(m.iter().all(|v| (v - 3.0).abs() < 1e-12));
        // 1D signals filter along x only
        let m = local_mean(&[0.0, 0.0, 1.0, 0.0, 0.0], 5, 1, &taps);
        assert!(m[2] < 1.0 && m[2] > m[0] && (m[1] - m[3]).abs() < 1e-15);
    }

    #[test]
    fn self_convergence_map_is_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_img(&mut rng, 100);
        let maps = convergence_maps(&[x.clone()], &[0.5], &x, 10, 10, CONVERGENCE_SSIM).unwrap();
        assert!(maps.iterations.iter().all(|&i| i == 1));
        assert!(maps.seconds.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn refinement_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_img(&mut rng, 144);
        let noise = random_img(&mut rng, 144);
        let snaps: Vec<Vec<C64>> = (0..8)
            .map(|s| {
                let e = 0.5f64.powi(s);
                x.iter().zip(&noise).map(|(a, b)| a + e * b).collect()
            })
            .collect();
        let times: Vec<f64> = (0..8).map(|s| s as f64).collect();
        let short = convergence_maps(&snaps[..5], &times[..5], &x, 12, 12, CONVERGENCE_SSIM).unwrap();
        let long = convergence_maps(&snaps, &times, &x, 12, 12, CONVERGENCE_SSIM).unwrap();
        assert!(long.iterations.iter().zip(&short.iterations).all(|(l, s)| l <= s));
        assert!(long.iterations.iter().all(|&i| i <= 8));
        let k = iterations_to_ssim(&snaps, &x, 12, 12, CONVERGENCE_SSIM).unwrap().unwrap();
        assert!(k > 1 && k <= 8);
    }
}
