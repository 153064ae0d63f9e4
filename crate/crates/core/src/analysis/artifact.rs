//! Structured k-space artifacts from signal outside the voxel grid.

use crate::error::{Error, Result};
use crate::operators::{
    build_kspace_operator, evaluate_kspace_model, evaluate_kspace_voxel_grid, LinearOperator, ModelKind, ModelSpec,
    NormalOperator,
};
use crate::phantom::{sample_phantom, EllipsePhantom};
use crate::solvers::{cg_tikhonov, power_iteration_gram, SolveConfig};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

use super::subspace::{GramMatrix, SingularSystem};

/// Fraction of energy of `img - reference` inside the 3-pixel-wide horizontal
/// and vertical bands through the center of a `side x side` k-space image.
pub fn axis_artifact_energy(img: &[C64], side: usize, reference: Option<&[C64]>) -> Result<f64> {
    if img.len() != side * side {
        return Err(Error::LengthMismatch { what: "k-space image", expected: side * side, got: img.len() });
    }
    if let Some(r) = reference {
        if r.len() != img.len() {
            return Err(Error::LengthMismatch { what: "reference image", expected: img.len(), got: r.len() });
        }
    }
    let c = (side / 2) as i64;
    let (mut band, mut total) = (0.0, 0.0);
    for iy in 0..side {
        for ix in 0..side {
            let i = iy * side + ix;
            let v = match reference {
                Some(r) => img[i] - r[i],
                None => img[i],
            };
            let e = v.norm_sqr();
            total += e;
            if (ix as i64 - c).abs() <= 1 || (iy as i64 - c).abs() <= 1 {
                band += e;
            }
        }
    }
    Ok(if total > 0.0 { band / total } else { 0.0 })
}

/// Cartesian k-space grid of `side x side` points at spacing `1 / (side dx)`,
/// x fastest, covering `[-1/(2 dx), 1/(2 dx))`.
pub fn kspace_display_grid(side: usize, dx: f64) -> Vec<[f64; 2]> {
    let half = (side / 2) as f64;
    let step = 1.0 / (side as f64 * dx);
    let mut pts = Vec::with_capacity(side * side);
    for iy in 0..side {
        for ix in 0..side {
            pts.push([(ix as f64 - half) * step, (iy as f64 - half) * step]);
        }
    }
    pts
}

/// Outcome of one artifact experiment on one trajectory.
pub struct ArtifactOutcome {
    pub samples: usize,
    /// Voxel-model artifact coefficients (reconstruction difference).
    pub voxel_artifact: Vec<C64>,
    /// Its projection on the near-nullspace of `A`.
    pub voxel_nullspace: Vec<C64>,
    /// `|projection|^2 / |artifact|^2`.
    pub nullspace_fraction: f64,
    pub near_nullspace_dim: usize,
    /// k-space model artifact coefficients.
    pub kspace_artifact: Vec<C64>,
    /// Artifact k-space of both models on the `N x N` display grid.
    pub voxel_kspace: Vec<C64>,
    pub kspace_kspace: Vec<C64>,
    pub axis_voxel: f64,
    pub axis_kspace: f64,
    pub energy_voxel: f64,
    pub energy_kspace: f64,
}

/// Tikhonov reconstructions of the in-FOV data with and without the
/// out-of-FOV component, for both models, with `lambda = lambda_rel *
/// sigma_max^2` of each operator.
///
/// The Tikhonov estimate is linear in the data, so the difference of the two
/// reconstructions is computed as the reconstruction of the out-of-FOV data
/// alone; this avoids cancelling two large, separately converged solutions.
pub fn artifact_experiment(
    t: &Trajectory,
    outside: &EllipsePhantom,
    voxel: &ModelSpec,
    kspace: &ModelSpec,
    lambda_rel: f64,
    fraction: f64,
) -> Result<ArtifactOutcome> {
    if voxel.kind != ModelKind::Voxel || kspace.kind != ModelKind::KSpace {
        return Err(Error::invalid("artifact experiment needs a voxel and a k-space model"));
    }
    if voxel.dims != Dims::Two || kspace.dims != Dims::Two || t.dims() != Dims::Two {
        return Err(Error::invalid("artifact experiment is two-dimensional"));
    }
    let d = sample_phantom(outside, t)?;

    let sys = SingularSystem::from_gram(&GramMatrix::voxel(t, voxel)?)?;
    let a = crate::operators::build_voxel_operator(t, voxel)?;
    let lam_a = lambda_rel * sys.sigma_max().powi(2);
    let db = sys.tikhonov_solve(&a.adjoint(&d), lam_a)?;
    let proj = sys.near_nullspace_projection(&db, fraction)?;
    let e2 = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let nullspace_fraction = if e2(&db) > 0.0 { e2(&proj) / e2(&db) } else { 0.0 };

    let h = build_kspace_operator(t, kspace)?;
    let (lam_h_max, _) = power_iteration_gram(&NormalOperator::new(&h), 200, 0);
    let cfg = SolveConfig {
        max_iters: 5000,
        lambda: lambda_rel * lam_h_max,
        tol: 1e-10,
        ..Default::default()
    };
    let dc = cg_tikhonov(&h, &d, &cfg)?.coefficients;

    let side = voxel.n;
    let voxel_kspace = evaluate_kspace_voxel_grid(&db, voxel, side)?;
    let kspace_kspace = evaluate_kspace_model(&dc, &kspace_display_grid(side, voxel.dx), kspace)?;
    Ok(ArtifactOutcome {
        samples: t.len(),
        axis_voxel: axis_artifact_energy(&voxel_kspace, side, None)?,
        axis_kspace: axis_artifact_energy(&kspace_kspace, side, None)?,
        energy_voxel: e2(&voxel_kspace),
        energy_kspace: e2(&kspace_kspace),
        near_nullspace_dim: sys.near_nullspace_dim(fraction),
        voxel_artifact: db,
        voxel_nullspace: proj,
        nullspace_fraction,
        kspace_artifact: dc,
        voxel_kspace,
        kspace_kspace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_axis_impulse() {
        let side = 8;
        let z = vec![C64::new(0.0, 0.0); 64];
        assert_eq!(axis_artifact_energy(&z, side, None).unwrap(), 0.0);
        let mut img = z.clone();
        img[4 * side + 1] = C64::new(2.0, 0.0);
        assert!((axis_artifact_energy(&img, side, None).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(axis_artifact_energy(&img, side, Some(&img)).unwrap(), 0.0);
        let mut off = z;
        off[0] = C64::new(1.0, 0.0);
        assert_eq!(axis_artifact_energy(&off, side, None).unwrap(), 0.0);
    }

    #[test]
    fn display_grid_matches_voxel_fft_grid() {
        let spec = ModelSpec::voxel(Dims::Two, 6, 0.5).unwrap();
        let b: Vec<C64> = (0..36).map(|i| C64::new(i as f64, -(i as f64) / 3.0)).collect();
        let fast = evaluate_kspace_voxel_grid(&b, &spec, 6).unwrap();
        let slow = crate::operators::evaluate_kspace_voxel(&b, &kspace_display_grid(6, 0.5), &spec).unwrap();
        assert!(fast.iter().zip(&slow).all(|(a, b)| (a - b).norm() < 1e-10));
    }
}
