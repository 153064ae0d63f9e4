//! Dense linear algebra helpers on top of faer.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::C64;

/// Eigenpairs of a Hermitian matrix, eigenvalues in nonincreasing order.
pub fn hermitian_eigen(g: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = g.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let n = g.nrows();
    let s = evd.S().column_vector();
    let u = evd.U();
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// Eigenpairs of a real symmetric matrix, eigenvalues in nonincreasing order.
pub fn symmetric_eigen(g: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = g.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let n = g.nrows();
    let s = evd.S().column_vector();
    let u = evd.U();
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// Solves the square system `a x = b` by LU with partial pivoting.
pub fn solve_dense(a: &Mat<C64>, b: &[C64]) -> Vec<C64> {
    let lu = a.partial_piv_lu();
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = faer::linalg::solvers::Solve::solve(&lu, &rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// Minimum-norm least-squares solver for a fixed matrix and many right-hand
/// sides, from a thin SVD truncated at `rcond * sigma_max`.
pub struct MinNormLstsq {
    u: Mat<C64>,
    s: Vec<f64>,
    v: Mat<C64>,
}

impl MinNormLstsq {
    pub fn new(a: &Mat<C64>, rcond: f64) -> Result<Self> {
        let svd = a.thin_svd().map_err(|_| Error::Eigen)?;
        let s_all = svd.S().column_vector();
        let smax = if s_all.nrows() > 0 { s_all[0].re } else { 0.0 };
        let rank = (0..s_all.nrows())
            .take_while(|&i| s_all[i].re > rcond * smax && s_all[i].re > 0.0)
            .count();
        let u = svd.U().subcols(0, rank).to_owned();
        let v = svd.V().subcols(0, rank).to_owned();
        let s = (0..rank).map(|i| s_all[i].re).collect();
        Ok(MinNormLstsq { u, s, v })
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    fn project(&self, b: &[C64]) -> Vec<C64> {
        (0..self.rank())
            .map(|j| (0..b.len()).map(|i| self.u[(i, j)].conj() * b[i]).sum())
            .collect()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let c = self.project(b);
        let n = self.v.nrows();
        (0..n)
            .map(|i| (0..self.rank()).map(|j| self.v[(i, j)] * (c[j] / self.s[j])).sum())
            .collect()
    }

    /// Column norms of `B - A X` for the minimum-norm solutions of every
    /// column of `B`.
    pub fn residual_norms(&self, b: &Mat<C64>) -> Vec<f64> {
        let coef = self.u.adjoint() * b;
        let r = b - &self.u * &coef;
        (0..r.ncols())
            .map(|j| (0..r.nrows()).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// `b - A x` for the minimum-norm solution `x`.
    pub fn residual(&self, b: &[C64]) -> Vec<C64> {
        let c = self.project(b);
        b.iter()
            .enumerate()
            .map(|(i, bi)| bi - (0..self.rank()).map(|j| self.u[(i, j)] * c[j]).sum::<C64>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_descending() {
        let g = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new([1.0, 5.0, 3.0][i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let (vals, vecs) = hermitian_eigen(&g).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-14 && (vals[2] - 1.0).abs() < 1e-14);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_norm_solution_of_rank_deficient_system() {
        // columns 0 and 1 identical: min-norm splits the weight evenly
        let a = Mat::from_fn(3, 2, |i, _| C64::new(i as f64 + 1.0, 0.0));
        let b = [C64::new(2.0, 0.0), C64::new(4.0, 0.0), C64::new(6.0, 0.0)];
        let ls = MinNormLstsq::new(&a, 1e-12).unwrap();
        assert_eq!(ls.rank(), 1);
        let x = ls.solve(&b);
        assert!((x[0] - 1.0).norm() < 1e-12 && (x[1] - 1.0).norm() < 1e-12);
        assert!(ls.residual(&b).iter().all(|r| r.norm() < 1e-12));
    }

    #[test]
    fn dense_solve() {
        let a = Mat::from_fn(2, 2, |i, j| C64::new([[2.0, 1.0], [1.0, 3.0]][i][j], 0.0));
        let x = solve_dense(&a, &[C64::new(3.0, 0.0), C64::new(4.0, 0.0)]);
        assert!((x[0] - 1.0).norm() < 1e-14 && (x[1] - 1.0).norm() < 1e-14);
    }
}
