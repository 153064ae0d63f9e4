//! Dense singular-subspace diagnostics: mean singular value index maps and
//! near-nullspace projections, computed from the eigendecomposition of the
//! column Gram matrix.

use faer::Mat;

use crate::error::{Error, Result};
use crate::fft::{wrap, GridFft};
use crate::linalg::{hermitian_eigen, symmetric_eigen};
use crate::operators::toeplitz::lag_sums;
use crate::operators::voxel::recentre;
use crate::operators::{build_kspace_operator, LinearOperator, ModelKind, ModelSpec, SparseMatrix};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

/// Memory budget of the dense subspace maps: 10^7 complex entries.
pub const MAX_DENSE_BYTES: usize = 10_000_000 * 16;

fn guard(entries: usize, bytes_per_entry: usize) -> Result<()> {
    if entries.saturating_mul(bytes_per_entry) > MAX_DENSE_BYTES {
        return Err(Error::TooLarge {
            entries,
            limit: MAX_DENSE_BYTES / bytes_per_entry,
        });
    }
    Ok(())
}

/// Dense `A^H A`, kept real when the operator is real.
pub enum GramMatrix {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GramMatrix::Real(m) => m.nrows(),
            GramMatrix::Complex(m) => m.nrows(),
        }
    }

    /// Exact voxel-model Gram filled from the Toeplitz lag sums.
    pub fn voxel(t: &Trajectory, spec: &ModelSpec) -> Result<Self> {
        if spec.kind != ModelKind::Voxel {
            return Err(Error::invalid("voxel Gram needs a voxel model spec"));
        }
        if spec.dims != t.dims() {
            return Err(Error::DimsMismatch { expected: spec.dims.count(), got: t.dims().count() });
        }
        let n = spec.n;
        let cols = spec.ncols();
        let lags = lag_sums(t, spec);
        let nl = 2 * n - 1;
        let g = match spec.dims {
            Dims::One => Mat::from_fn(n, n, |r, c| lags[r + n - 1 - c]),
            Dims::Two => Mat::from_fn(cols, cols, |r, c| {
                let (ry, rx) = (r / n, r % n);
                let (cy, cx) = (c / n, c % n);
                lags[(ry + n - 1 - cy) * nl + (rx + n - 1 - cx)]
            }),
        };
        Ok(GramMatrix::Complex(g))
    }

    /// `H^H H` by accumulating the outer product of every sparse row.
    pub fn sparse(h: &SparseMatrix) -> Result<Self> {
        let n = h.ncols();
        let real = (0..h.nrows()).all(|i| h.row(i).1.iter().all(|v| v.im == 0.0));
        if real {
            let mut g = Mat::<f64>::zeros(n, n);
            for i in 0..h.nrows() {
                let (cols, vals) = h.row(i);
                for (a, va) in cols.iter().zip(vals) {
                    for (b, vb) in cols.iter().zip(vals) {
                        g[(*a, *b)] += va.re * vb.re;
                    }
                }
            }
            Ok(GramMatrix::Real(g))
        } else {
            let mut g = Mat::<C64>::zeros(n, n);
            for i in 0..h.nrows() {
                let (cols, vals) = h.row(i);
                for (a, va) in cols.iter().zip(vals) {
                    for (b, vb) in cols.iter().zip(vals) {
                        g[(*a, *b)] += va.conj() * vb;
                    }
                }
            }
            Ok(GramMatrix::Complex(g))
        }
    }

    /// Gram of an arbitrary operator through its dense matrix.
    pub fn from_operator<A: LinearOperator + ?Sized>(op: &A) -> Result<Self> {
        guard(op.nrows() * op.ncols(), 16)?;
        guard(op.ncols() * op.ncols(), 16)?;
        let a = op.to_dense();
        Ok(GramMatrix::Complex(a.adjoint() * &a))
    }

    /// Gram of the model's forward operator on trajectory `t`.
    pub fn for_model(t: &Trajectory, spec: &ModelSpec) -> Result<Self> {
        match spec.kind {
            ModelKind::Voxel => Self::voxel(t, spec),
            ModelKind::KSpace => Self::sparse(&build_kspace_operator(t, spec)?),
        }
    }
}

enum Vectors {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

/// Singular values (nonincreasing) and right singular vectors of an operator.
pub struct SingularSystem {
    pub values: Vec<f64>,
    vectors: Vectors,
}

impl SingularSystem {
    pub fn from_gram(g: &GramMatrix) -> Result<Self> {
        let (eig, vectors) = match g {
            GramMatrix::Real(m) => {
                let (e, v) = symmetric_eigen(m)?;
                (e, Vectors::Real(v))
            }
            GramMatrix::Complex(m) => {
                let (e, v) = hermitian_eigen(m)?;
                (e, Vectors::Complex(v))
            }
        };
        let values = eig.iter().map(|&l| l.max(0.0).sqrt()).collect();
        Ok(SingularSystem { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Right singular vector `i` (0-based, by nonincreasing singular value).
    pub fn vector(&self, i: usize) -> Vec<C64> {
        let n = self.dim();
        match &self.vectors {
            Vectors::Real(v) => (0..n).map(|r| C64::new(v[(r, i)], 0.0)).collect(),
            Vectors::Complex(v) => (0..n).map(|r| v[(r, i)]).collect(),
        }
    }

    fn coords(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        match &self.vectors {
            Vectors::Real(v) => (0..n).map(|i| (0..n).map(|r| v[(r, i)] * x[r]).sum()).collect(),
            Vectors::Complex(v) => (0..n).map(|i| (0..n).map(|r| v[(r, i)].conj() * x[r]).sum()).collect(),
        }
    }

    fn combine(&self, c: &[C64]) -> Vec<C64> {
        let n = self.dim();
        match &self.vectors {
            Vectors::Real(v) => (0..n).map(|r| (0..n).map(|i| v[(r, i)] * c[i]).sum()).collect(),
            Vectors::Complex(v) => (0..n).map(|r| (0..n).map(|i| v[(r, i)] * c[i]).sum()).collect(),
        }
    }

    /// Solves `(A^H A + lambda I) x = rhs`, with `rhs = A^H d`.
    pub fn tikhonov_solve(&self, rhs: &[C64], lambda: f64) -> Result<Vec<C64>> {
        if rhs.len() != self.dim() {
            return Err(Error::LengthMismatch { what: "right-hand side", expected: self.dim(), got: rhs.len() });
        }
        let mut c = self.coords(rhs);
        for (ci, s) in c.iter_mut().zip(&self.values) {
            let d = s * s + lambda;
            *ci = if d > 0.0 { *ci / d } else { C64::new(0.0, 0.0) };
        }
        Ok(self.combine(&c))
    }

    /// Projection onto the right singular vectors with `sigma < fraction * sigma_max`.
    pub fn near_nullspace_projection(&self, x: &[C64], fraction: f64) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch { what: "coefficients", expected: self.dim(), got: x.len() });
        }
        let cut = fraction * self.sigma_max();
        let mut c = self.coords(x);
        for (ci, s) in c.iter_mut().zip(&self.values) {
            if *s >= cut {
                *ci = C64::new(0.0, 0.0);
            }
        }
        Ok(self.combine(&c))
    }

    /// Number of singular values below `fraction * sigma_max`.
    pub fn near_nullspace_dim(&self, fraction: f64) -> usize {
        let cut = fraction * self.sigma_max();
        self.values.iter().filter(|&&s| s < cut).count()
    }
}

/// Per-location mean singular value index.
#[derive(Clone, Debug)]
pub struct SubspaceMap {
    pub mu: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub side: usize,
    pub dims: Dims,
}

impl SubspaceMap {
    /// Means of `mu` over the central region `max(|x|, |y|) <= 1/8` and the
    /// outer band `max(|x|, |y|) >= 3/8`, in units of the map extent.
    pub fn center_edge_means(&self) -> (f64, f64) {
        let s = self.side;
        let coord = |i: usize| (i as f64 - (s / 2) as f64 + 0.5) / s as f64;
        let (mut c, mut nc, mut e, mut ne) = (0.0, 0usize, 0.0, 0usize);
        for (idx, m) in self.mu.iter().enumerate() {
            let r = match self.dims {
                Dims::One => coord(idx).abs(),
                Dims::Two => coord(idx % s).abs().max(coord(idx / s).abs()),
            };
            if r <= 0.125 {
                c += m;
                nc += 1;
            }
            if r >= 0.375 {
                e += m;
                ne += 1;
            }
        }
        (c / nc.max(1) as f64, e / ne.max(1) as f64)
    }
}

/// Centered unitary inverse DFT of a coefficient vector indexed
/// `l = -L/2 .. L/2-1`, giving samples at `x = j dx`, `j = -L/2 .. L/2-1`.
fn centered_idft(v: &[C64], side: usize, dims: Dims, fft: &GridFft) -> Vec<C64> {
    let half = (side / 2) as i64;
    let mut buf = vec![C64::new(0.0, 0.0); fft.len()];
    match dims {
        Dims::One => {
            for (i, c) in v.iter().enumerate() {
                buf[wrap(i as i64 - half, side)] = *c;
            }
        }
        Dims::Two => {
            for iy in 0..side {
                let gy = wrap(iy as i64 - half, side);
                for ix in 0..side {
                    buf[gy * side + wrap(ix as i64 - half, side)] = v[iy * side + ix];
                }
            }
        }
    }
    fft.inverse(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|x| *x *= scale);
    recentre(&buf, side, dims)
}

/// `mu_n = sum_i i p_n(i)` with `p_n(i) = |[v_i]_n| / sum_i |[v_i]_n|` over all
/// right singular vectors (1-based `i`). For the k-space model each vector is
/// first moved to image space by a centered unitary DFT.
pub fn mean_singular_value_index(sys: &SingularSystem, spec: &ModelSpec) -> Result<SubspaceMap> {
    let side = spec.basis_len();
    let n = sys.dim();
    if n != spec.ncols() {
        return Err(Error::LengthMismatch { what: "singular vectors", expected: spec.ncols(), got: n });
    }
    let fft = GridFft::square(side, spec.dims);
    let mut weight = vec![0.0; n];
    let mut moment = vec![0.0; n];
    for i in 0..n {
        let mut v = sys.vector(i);
        if spec.kind == ModelKind::KSpace {
            v = centered_idft(&v, side, spec.dims, &fft);
        }
        for (loc, c) in v.iter().enumerate() {
            let a = c.norm();
            weight[loc] += a;
            moment[loc] += (i + 1) as f64 * a;
        }
    }
    let mu = moment.iter().zip(&weight).map(|(m, w)| if *w > 0.0 { m / w } else { 0.0 }).collect();
    Ok(SubspaceMap {
        mu,
        singular_values: sys.values.clone(),
        side,
        dims: spec.dims,
    })
}

/// Builds the model Gram on `t`, factors it and returns the index map.
///
/// Rejects problems whose dense Gram exceeds the 10^7-entry budget; real
/// Grams (the k-space model) count half a complex entry per element.
pub fn subspace_map(t: &Trajectory, spec: &ModelSpec) -> Result<SubspaceMap> {
    let n = spec.ncols();
    let bytes = match spec.kind {
        ModelKind::Voxel => 16,
        ModelKind::KSpace => 8,
    };
    guard(n * n, bytes)?;
    let sys = SingularSystem::from_gram(&GramMatrix::for_model(t, spec)?)?;
    mean_singular_value_index(&sys, spec)
}
