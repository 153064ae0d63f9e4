//! Diagnostics used to compare the two models.

pub mod approx;
pub mod artifact;
pub mod ssim;
pub mod subspace;

pub use approx::{
    approx_error, approx_error_sweep, default_x0_range, linspace, rms_approx_error, rms_error_contour, rms_of_sweep,
    single_sample_response, write_contour_csv, write_sweep_csv, ApproxErrorSpec, ErrorSweep,
};
pub use artifact::{artifact_experiment, axis_artifact_energy, kspace_display_grid, ArtifactOutcome};
pub use ssim::{
    convergence_maps, iterations_to_ssim, ssim, ssim_map, ConvergenceMaps, CONVERGENCE_SSIM, SSIM_WINDOW,
};
pub use subspace::{mean_singular_value_index, subspace_map, GramMatrix, SingularSystem, SubspaceMap};

use crate::error::{Error, Result};
use crate::operators::{evaluate_image_kspace_model, ModelKind, ModelSpec};
use crate::trajectory::Dims;
use crate::C64;

/// Image samples at the nominal voxel positions `x_n = n dx`,
/// `n = -N/2 .. N/2-1` (x fastest), in units of the continuous image.
///
/// Voxel coefficients are divided by the voxel volume `dx^d` (with `Phi = 1`
/// they approximate `f(x_n) dx^d`); the k-space model image is evaluated on
/// its `L`-point grid, whose spacing is `dx`, and cropped to the nominal FOV.
pub fn model_image(c: &[C64], spec: &ModelSpec) -> Result<Vec<C64>> {
    if c.len() != spec.ncols() {
        return Err(Error::LengthMismatch { what: "coefficients", expected: spec.ncols(), got: c.len() });
    }
    match spec.kind {
        ModelKind::Voxel => {
            let vol = spec.dx.powi(spec.dims.count() as i32);
            Ok(c.iter().map(|v| v / vol).collect())
        }
        ModelKind::KSpace => {
            let l = spec.l();
            let full = evaluate_image_kspace_model(c, l, spec)?;
            Ok(crop_center(&full, l, spec.n, spec.dims))
        }
    }
}

/// Central `n`-point window of a centered `g`-point grid (per dimension).
pub fn crop_center(img: &[C64], g: usize, n: usize, dims: Dims) -> Vec<C64> {
    let off = g / 2 - n / 2;
    match dims {
        Dims::One => img[off..off + n].to_vec(),
        Dims::Two => (0..n).flat_map(|iy| img[(iy + off) * g + off..(iy + off) * g + off + n].iter().copied()).collect(),
    }
}

/// `|img - reference| / |reference|` over the entries selected by `mask`.
pub fn nrmse(reference: &[C64], img: &[C64], mask: impl Fn(usize) -> bool) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (r, v)) in reference.iter().zip(img).enumerate() {
        if mask(i) {
            num += (v - r).norm_sqr();
            den += r.norm_sqr();
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}
