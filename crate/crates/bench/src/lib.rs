//! Shared fixtures for the operator and solver benchmarks.

use kspace_core::operators::{
    build_gridding_operator, build_kspace_operator, build_toeplitz_gram, build_voxel_operator, GriddingOperator,
    SparseMatrix, ToeplitzGram, VoxelOperator,
};
use kspace_core::phantom::{head_phantom, sample_phantom};
use kspace_core::trajectory::make_spiral;
use kspace_core::{Dims, ModelSpec, Result, Trajectory, C64};

/// Spiral problem on an `n x n` grid with Nyquist coverage for the FOV.
pub struct Fixture {
    pub n: usize,
    pub trajectory: Trajectory,
    pub data: Vec<C64>,
    pub voxel: ModelSpec,
    pub kspace: ModelSpec,
}

impl Fixture {
    pub fn spiral(n: usize) -> Result<Self> {
        let interleaves = (n / 8).max(1);
        let turns = n as f64 / (2.0 * interleaves as f64);
        let trajectory = make_spiral(interleaves, 12 * n, turns, 0.49)?;
        let data = sample_phantom(&head_phantom(n as f64), &trajectory)?;
        Ok(Fixture {
            n,
            trajectory,
            data,
            voxel: ModelSpec::voxel(Dims::Two, n, 1.0)?,
            kspace: ModelSpec::kspace(Dims::Two, n, 1.0, 3, 1.3)?,
        })
    }

    pub fn exact(&self) -> Result<VoxelOperator> {
        build_voxel_operator(&self.trajectory, &self.voxel)
    }

    pub fn gridding(&self) -> Result<GriddingOperator> {
        build_gridding_operator(&self.trajectory, &self.voxel, 2.0, 4)
    }

    pub fn toeplitz(&self) -> Result<ToeplitzGram> {
        build_toeplitz_gram(&self.trajectory, &self.voxel)
    }

    pub fn kspace_operator(&self) -> Result<SparseMatrix> {
        build_kspace_operator(&self.trajectory, &self.kspace)
    }

    /// Deterministic image-sized test vector.
    pub fn image_vector(&self, len: usize) -> Vec<C64> {
        (0..len).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kspace_core::LinearOperator;

    #[test]
    fn fixture_shapes() {
        let f = Fixture::spiral(16).unwrap();
        assert_eq!(f.trajectory.len(), f.data.len());
        assert_eq!(f.exact().unwrap().ncols(), 256);
        let h = f.kspace_operator().unwrap();
        assert_eq!(h.ncols(), f.kspace.ncols());
        assert_eq!(h.nrows(), f.trajectory.len());
    }
}
