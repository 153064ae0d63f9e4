//! Forward operators of both models and their kernels.

pub mod gridding;
pub mod kernels;
pub mod kspace;
pub mod linear;
pub mod model;
pub mod sparse;
pub mod toeplitz;
pub mod voxel;

pub use gridding::{build_gridding_operator, GriddingOperator};
pub use kernels::{bspline, dirichlet_kernel, psi_image, KaiserBessel};
pub use kspace::{
    build_kspace_operator, centering_weights, evaluate_image_kspace_model, evaluate_kspace_model,
    image_grid_positions,
};
pub use linear::{DenseOperator, DiagonalOperator, GramOperator, LinearOperator, NormalOperator};
pub use model::{ModelKind, ModelSpec};
pub use sparse::SparseMatrix;
pub use toeplitz::{build_toeplitz_gram, ToeplitzGram};
pub use voxel::{
    build_voxel_operator, evaluate_kspace_voxel, evaluate_kspace_voxel_grid, grid_positions,
    VoxelOperator,
};
