use crate::error::{Error, Result};
use crate::trajectory::Dims;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Voxel,
    KSpace,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "voxel" => Ok(ModelKind::Voxel),
            "kspace" | "k-space" => Ok(ModelKind::KSpace),
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Voxel => "voxel",
            ModelKind::KSpace => "kspace",
        })
    }
}

/// Parameters of one model instance.
///
/// For the k-space model `L = round(rho N)` (bumped to the next even integer)
/// and `delta_k = 1 / (L dx)`, so the spacing is always derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dims: Dims,
    pub n: usize,
    pub dx: f64,
    pub p: usize,
    pub rho: f64,
    pub x0: [f64; 2],
}

impl ModelSpec {
    pub fn voxel(dims: Dims, n: usize, dx: f64) -> Result<Self> {
        let spec = ModelSpec {
            kind: ModelKind::Voxel,
            dims,
            n,
            dx,
            p: 0,
            rho: 1.0,
            x0: [0.0; 2],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kspace(dims: Dims, n: usize, dx: f64, p: usize, rho: f64) -> Result<Self> {
        let spec = ModelSpec {
            kind: ModelKind::KSpace,
            dims,
            n,
            dx,
            p,
            rho,
            x0: [0.0; 2],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_centering(mut self, x0: [f64; 2]) -> Self {
        self.x0 = x0;
        if self.dims == Dims::One {
            self.x0[1] = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::invalid(format!("N must be positive and even, got {}", self.n)));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::invalid(format!("dx must be positive, got {}", self.dx)));
        }
        if !(self.rho.is_finite() && self.rho >= 1.0) {
            return Err(Error::invalid(format!("rho must be >= 1, got {}", self.rho)));
        }
        if !(self.x0[0].is_finite() && self.x0[1].is_finite()) {
            return Err(Error::invalid("centering shift must be finite"));
        }
        Ok(())
    }

    /// Number of k-space basis functions per dimension.
    pub fn l(&self) -> usize {
        let l = (self.rho * self.n as f64).round() as usize;
        l + l % 2
    }

    /// Basis functions per dimension: `N` for the voxel model, `L` otherwise.
    pub fn basis_len(&self) -> usize {
        match self.kind {
            ModelKind::Voxel => self.n,
            ModelKind::KSpace => self.l(),
        }
    }

    /// Total number of unknowns.
    pub fn ncols(&self) -> usize {
        self.dims.grid_len(self.basis_len())
    }

    /// k-space basis spacing `1 / (L dx)`.
    pub fn delta_k(&self) -> f64 {
        1.0 / (self.l() as f64 * self.dx)
    }

    /// Nominal FOV `N dx`.
    pub fn fov(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// FOV spanned by the model's basis: `N dx` (voxel) or `L dx` (k-space).
    pub fn model_fov(&self) -> f64 {
        self.basis_len() as f64 * self.dx
    }
}
