//! Reconstruction toolkit for non-Cartesian Fourier imaging.
//!
//! Two linear models of the measured Fourier data are provided side by side:
//!
//! * the classical image-domain **voxel model**, where the image is a sum of
//!   uniformly shifted voxel functions and the forward map is a dense
//!   nonuniform DFT (with gridding and Toeplitz fast paths), and
//! * the **k-space model**, where k-space itself is a sum of uniformly shifted
//!   compact-support B-splines and the forward map is a sparse interpolation
//!   matrix.
//!
//! Around the two models sit analytic phantoms with exact Fourier transforms,
//! trajectory generators, iterative solvers (CG, LSQR, FISTA with TV) and the
//! diagnostic analyses used to compare them (approximation error sweeps,
//! singular subspace maps, near-nullspace projections, SSIM accounting).

pub mod analysis;
pub mod error;
pub mod fft;
pub mod linalg;
pub mod multichannel;
pub mod operators;
pub mod phantom;
pub mod solvers;
pub mod trajectory;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use operators::{GramOperator, LinearOperator, ModelKind, ModelSpec};
pub use phantom::{Ellipse, EllipsePhantom};
pub use solvers::{ReconResult, SolveConfig};
pub use trajectory::{Dims, Trajectory};
