use super::{axpy, Recorder, ReconResult, SolveConfig};
use crate::error::{Error, Result};
use crate::operators::linear::{dot, norm2, GramOperator, LinearOperator, NormalOperator};
use crate::C64;

/// Minimizes `|A x - d|^2 + lambda |x|^2` by CG on the normal equations.
pub fn cg_tikhonov<A: LinearOperator + ?Sized>(op: &A, d: &[C64], cfg: &SolveConfig) -> Result<ReconResult> {
    if d.len() != op.nrows() {
        return Err(Error::LengthMismatch {
            what: "data",
            expected: op.nrows(),
            got: d.len(),
        });
    }
    let rhs = op.adjoint(d);
    let d2 = d.iter().map(|v| v.norm_sqr()).sum();
    cg_tikhonov_gram(&NormalOperator::new(op), &rhs, d2, cfg)
}

/// CG on `(G + lambda I) x = rhs` where `G = A^H A` and `rhs = A^H d`.
///
/// `data_norm2 = |d|^2` only shifts the reported cost so that it equals the
/// Tikhonov objective `|A x - d|^2 + lambda |x|^2`.
pub fn cg_tikhonov_gram<G: GramOperator + ?Sized>(
    gram: &G,
    rhs: &[C64],
    data_norm2: f64,
    cfg: &SolveConfig,
) -> Result<ReconResult> {
    cfg.validate()?;
    let n = gram.dim();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            what: "right-hand side",
            expected: n,
            got: rhs.len(),
        });
    }
    let mut rec = Recorder::new(cfg.record_iterates);
    let mut x = vec![C64::new(0.0, 0.0); n];
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        rec.record(data_norm2, &x);
        return Ok(rec.finish(x, true));
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut q = vec![C64::new(0.0, 0.0); n];
    let mut rr = dot(&r, &r).re;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        gram.gram_into(&p, &mut q);
        axpy(C64::new(cfg.lambda, 0.0), &p, &mut q);
        let pq = dot(&p, &q).re;
        if !(pq > 0.0) {
            log::warn!("CG breakdown: p^H (G + lambda I) p = {pq}");
            break;
        }
        let alpha = rr / pq;
        axpy(C64::new(alpha, 0.0), &p, &mut x);
        axpy(C64::new(-alpha, 0.0), &q, &mut r);
        let rr_new = dot(&r, &r).re;
        // |A x - d|^2 + lambda |x|^2 = |d|^2 - Re(x^H (b + r))
        let cost = data_norm2 - x.iter().zip(rhs.iter().zip(&r)).map(|(xi, (bi, ri))| (xi.conj() * (bi + ri)).re).sum::<f64>();
        rec.record(cost, &x);
        if rr_new.sqrt() <= cfg.tol * bnorm {
            converged = true;
            break;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(rec.finish(x, converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_dense;
    use crate::operators::linear::{DenseOperator, DiagonalOperator};
    use faer::Mat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn identity_in_one_iteration() {
        let d = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5)];
        let res = cg_tikhonov(&DiagonalOperator::identity(2), &d, &SolveConfig::default()).unwrap();
        assert_eq!(res.iterations(), 1);
        assert!(res.converged);
        for (a, b) in res.coefficients.iter().zip(&d) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_columns_in_one_iteration() {
        let n = 8;
        let op = DenseOperator::from_fn(n, n, |m, j| {
            C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (m * j) as f64 / n as f64)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_vec(&mut rng, n);
        let res = cg_tikhonov(&op, &d, &SolveConfig::default()).unwrap();
        assert_eq!(res.iterations(), 1);
        let want: Vec<C64> = op.adjoint(&d).iter().map(|v| v / n as f64).collect();
        for (a, b) in res.coefficients.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (m, n) = (32, 12);
        let vals = random_vec(&mut rng, m * n);
        let op = DenseOperator::from_fn(m, n, |i, j| vals[i * n + j]);
        let d = random_vec(&mut rng, m);
        let lambda = 0.3;
        let cfg = SolveConfig { max_iters: 200, lambda, tol: 1e-14, ..Default::default() };
        let res = cg_tikhonov(&op, &d, &cfg).unwrap();
        let g = op.matrix.adjoint() * &op.matrix + Mat::<C64>::from_fn(n, n, |i, j| if i == j { C64::new(lambda, 0.0) } else { C64::new(0.0, 0.0) });
        let x = solve_dense(&g, &op.adjoint(&d));
        let err: f64 = res.coefficients.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm2(&x) < 1e-8);
        // reported cost is the Tikhonov objective and never increases
        let r: Vec<C64> = op.apply(&res.coefficients).iter().zip(&d).map(|(a, b)| a - b).collect();
        let f = r.iter().map(|v| v.norm_sqr()).sum::<f64>() + lambda * res.coefficients.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((res.cost_history.last().unwrap() - f).abs() < 1e-9 * f);
        assert!(res.cost_history.windows(2).all(|w| w[1] <= w[0] + 1e-8));
    }

    #[test]
    fn zero_data_gives_zero() {
        let res = cg_tikhonov(&DiagonalOperator::identity(3), &[C64::new(0.0, 0.0); 3], &SolveConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.coefficients.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn snapshots_are_recorded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals = random_vec(&mut rng, 60);
        let op = DenseOperator::from_fn(10, 6, |i, j| vals[i * 6 + j]);
        let d = random_vec(&mut rng, 10);
        let cfg = SolveConfig { max_iters: 4, tol: 1e-30, record_iterates: true, ..Default::default() };
        let res = cg_tikhonov(&op, &d, &cfg).unwrap();
        assert_eq!(res.iterate_snapshots.len(), 4);
        assert_eq!(res.iterate_snapshots[3], res.coefficients);
        assert!(res.time_history.windows(2).all(|w| w[1] >= w[0]));
    }
}
