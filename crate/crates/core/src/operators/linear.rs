use faer::Mat;

use crate::C64;

/// A linear map from `ncols` coefficients to `nrows` samples.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply_into(&self, x: &[C64], y: &mut [C64]);

    /// `x = A^H y`; `x` is overwritten.
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]);

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows()];
        self.apply_into(x, &mut y);
        y
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); self.ncols()];
        self.adjoint_into(y, &mut x);
        x
    }

    /// Dense matrix of the operator, column by column.
    fn to_dense(&self) -> Mat<C64> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = Mat::<C64>::zeros(m, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            for i in 0..m {
                out[(i, j)] = col[i];
            }
            e[j] = C64::new(0.0, 0.0);
        }
        out
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_into(x, y)
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        (**self).adjoint_into(y, x)
    }
    fn to_dense(&self) -> Mat<C64> {
        (**self).to_dense()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_into(x, y)
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        (**self).adjoint_into(y, x)
    }
    fn to_dense(&self) -> Mat<C64> {
        (**self).to_dense()
    }
}

/// Application of a Hermitian matrix `A^H A`.
pub trait GramOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y = A^H A x`; `y` is overwritten.
    fn gram_into(&self, x: &[C64], y: &mut [C64]);

    fn gram(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.gram_into(x, &mut y);
        y
    }
}

/// Gram product formed from an operator as `A^H (A x)`.
pub struct NormalOperator<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
}

impl<'a, A: LinearOperator + ?Sized> NormalOperator<'a, A> {
    pub fn new(op: &'a A) -> Self {
        NormalOperator { op }
    }
}

impl<A: LinearOperator + ?Sized> GramOperator for NormalOperator<'_, A> {
    fn dim(&self) -> usize {
        self.op.ncols()
    }

    fn gram_into(&self, x: &[C64], y: &mut [C64]) {
        let tmp = self.op.apply(x);
        self.op.adjoint_into(&tmp, y);
    }
}

/// Explicit dense matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub matrix: Mat<C64>,
}

impl DenseOperator {
    pub fn new(matrix: Mat<C64>) -> Self {
        DenseOperator { matrix }
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        DenseOperator { matrix: Mat::from_fn(nrows, ncols, f) }
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }
    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += self.matrix[(i, j)] * xj;
            }
            *yi = acc;
        }
    }

    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (i, yi) in y.iter().enumerate() {
                acc += self.matrix[(i, j)].conj() * yi;
            }
            *xj = acc;
        }
    }

    fn to_dense(&self) -> Mat<C64> {
        self.matrix.clone()
    }
}

/// Diagonal operator (identity when all ones).
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    pub diag: Vec<C64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<C64>) -> Self {
        DiagonalOperator { diag }
    }

    pub fn identity(n: usize) -> Self {
        DiagonalOperator { diag: vec![C64::new(1.0, 0.0); n] }
    }
}

impl LinearOperator for DiagonalOperator {
    fn nrows(&self) -> usize {
        self.diag.len()
    }
    fn ncols(&self) -> usize {
        self.diag.len()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        for ((xi, yi), d) in x.iter_mut().zip(y).zip(&self.diag) {
            *xi = d.conj() * yi;
        }
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `|<A x, y> - <x, A^H y>| / (|A x| |y|)` for given vectors.
pub fn adjoint_mismatch<A: LinearOperator + ?Sized>(op: &A, x: &[C64], y: &[C64]) -> f64 {
    let ax = op.apply(x);
    let ahy = op.adjoint(y);
    let lhs = dot(y, &ax);
    let rhs = dot(&ahy, x);
    let scale = (norm2(&ax) * norm2(y)).max(norm2(x) * norm2(&ahy)).max(f64::MIN_POSITIVE);
    (lhs - rhs).norm() / scale
}
