use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::linear::{dot, norm2, GramOperator, LinearOperator, NormalOperator};
use crate::C64;

/// `sum_q A_q^H A_q` over operators sharing a column space.
pub struct StackedGram<'a> {
    ops: &'a [&'a dyn LinearOperator],
}

impl<'a> StackedGram<'a> {
    pub fn new(ops: &'a [&'a dyn LinearOperator]) -> Self {
        StackedGram { ops }
    }
}

impl GramOperator for StackedGram<'_> {
    fn dim(&self) -> usize {
        self.ops.first().map_or(0, |op| op.ncols())
    }

    fn gram_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut tmp = vec![C64::new(0.0, 0.0); y.len()];
        for op in self.ops {
            let ax = op.apply(x);
            op.adjoint_into(&ax, &mut tmp);
            for (yi, ti) in y.iter_mut().zip(&tmp) {
                *yi += ti;
            }
        }
    }
}

/// Largest eigenvalue of a Gram operator by power iteration.
///
/// Returns the Rayleigh-quotient estimate after `iters` steps and the
/// relative change over the final step.
pub fn power_iteration_gram<G: GramOperator + ?Sized>(g: &G, iters: usize, seed: u64) -> (f64, f64) {
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nv = norm2(&v);
    if nv == 0.0 {
        return (0.0, 0.0);
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut lam = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..iters {
        g.gram_into(&v, &mut w);
        let next = dot(&v, &w).re;
        change = if next > 0.0 { (next - lam).abs() / next } else { 0.0 };
        lam = next;
        let nw = norm2(&w);
        if nw == 0.0 {
            return (0.0, 0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    (lam, change)
}

/// Estimate of the largest singular value of `op`.
pub fn power_iteration_norm<A: LinearOperator + ?Sized>(op: &A, iters: usize) -> f64 {
    power_iteration_gram(&NormalOperator::new(op), iters, 0).0.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linear::{DenseOperator, DiagonalOperator};

    #[test]
    fn identity_and_diagonal() {
        assert!((power_iteration_norm(&DiagonalOperator::identity(5), 10) - 1.0).abs() < 1e-12);
        let d = DiagonalOperator::new(vec![C64::new(3.0, 0.0), C64::new(1.0, 0.0)]);
        assert!((power_iteration_norm(&d, 50) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn bounded_by_true_norm_and_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 50;
        let vals: Vec<C64> = (0..n * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let op = DenseOperator::from_fn(n, n, |i, j| vals[i * n + j]);
        let smax = op.matrix.singular_values().unwrap()[0];
        let est = power_iteration_norm(&op, 50);
        assert!(est <= smax + 1e-6);
        assert!(est >= 0.99 * smax);
        let mut prev = 0.0;
        for iters in [1, 2, 5, 10, 20, 40] {
            let e = power_iteration_norm(&op, iters);
            assert!(e >= prev - 1e-12);
            prev = e;
        }
    }
}
