use super::power::{power_iteration_gram, StackedGram};
use super::tv::{TvProx, TvShape};
use super::{Recorder, ReconResult, SolveConfig};
use crate::error::{Error, Result};
use crate::operators::linear::{norm2, LinearOperator};
use crate::C64;

const POWER_ITERS: usize = 30;
const POWER_TOL: f64 = 1e-2;
const LIPSCHITZ_SAFETY: f64 = 1.02;
const PROX_ITERS: usize = 10;

fn data_cost(ax: &[Vec<C64>], data: &[&[C64]]) -> f64 {
    ax.iter()
        .zip(data)
        .map(|(a, d)| a.iter().zip(d.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>())
        .sum()
}

/// `sum_q |A_q x - d_q|^2 + lambda |D x|_1`.
pub fn tv_objective(ops: &[&dyn LinearOperator], data: &[&[C64]], shape: TvShape, lambda: f64, x: &[C64]) -> f64 {
    let ax: Vec<Vec<C64>> = ops.iter().map(|op| op.apply(x)).collect();
    data_cost(&ax, data) + lambda * shape.norm(x)
}

/// FISTA for `sum_q |A_q x - d_q|^2 + lambda |D x|_1` with anisotropic TV.
///
/// The step is `1 / L` with `L = 2 sigma_max^2` of the stacked operator from
/// 30 power iterations; the TV prox runs 10 warm-started dual iterations.
/// Each iteration applies every operator once forward and once adjoint.
pub fn fista_tv(
    ops: &[&dyn LinearOperator],
    data: &[&[C64]],
    shape: TvShape,
    cfg: &SolveConfig,
) -> Result<ReconResult> {
    cfg.validate()?;
    if ops.is_empty() || ops.len() != data.len() {
        return Err(Error::invalid(format!(
            "need one data vector per operator, got {} operators and {} data vectors",
            ops.len(),
            data.len()
        )));
    }
    let n = ops[0].ncols();
    if n != shape.len() {
        return Err(Error::LengthMismatch {
            what: "TV grid",
            expected: n,
            got: shape.len(),
        });
    }
    for (op, d) in ops.iter().zip(data) {
        if op.ncols() != n {
            return Err(Error::LengthMismatch { what: "operator columns", expected: n, got: op.ncols() });
        }
        if op.nrows() != d.len() {
            return Err(Error::LengthMismatch { what: "data", expected: op.nrows(), got: d.len() });
        }
    }

    let gram = StackedGram::new(ops);
    let (lam_max, change) = power_iteration_gram(&gram, POWER_ITERS, cfg.seed);
    if change > POWER_TOL {
        return Err(Error::PowerIteration { change });
    }
    if !(lam_max > 0.0) {
        return Err(Error::invalid("operators are identically zero"));
    }
    let lip = 2.0 * lam_max * LIPSCHITZ_SAFETY;
    let gamma = cfg.lambda / lip;

    let zeros = |len: usize| vec![C64::new(0.0, 0.0); len];
    let mut rec = Recorder::new(cfg.record_iterates);
    let mut prox = TvProx::new(shape);

    let mut x = zeros(n);
    let mut y = zeros(n);
    let mut z = zeros(n);
    let mut v = zeros(n);
    let mut grad = zeros(n);
    let mut tmp = zeros(n);
    let mut ax: Vec<Vec<C64>> = ops.iter().map(|op| zeros(op.nrows())).collect();
    let mut ay = ax.clone();
    let mut az = ax.clone();
    let mut cost_x = data_cost(&ax, data);
    let mut t = 1.0f64;
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
        for ((op, a), d) in ops.iter().zip(&ay).zip(data) {
            let r: Vec<C64> = a.iter().zip(d.iter()).map(|(p, q)| p - q).collect();
            op.adjoint_into(&r, &mut tmp);
            for (g, t) in grad.iter_mut().zip(&tmp) {
                *g += 2.0 * t;
            }
        }
        for ((vi, yi), gi) in v.iter_mut().zip(&y).zip(&grad) {
            *vi = yi - gi / lip;
        }
        prox.apply(&v, gamma, PROX_ITERS, &mut z);
        for (op, a) in ops.iter().zip(az.iter_mut()) {
            op.apply_into(&z, a);
        }
        let cost_z = data_cost(&az, data) + cfg.lambda * shape.norm(&z);

        let accept = !cfg.monotone || cost_z <= cost_x;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let c_z = t / t_next;
        let c_x = (t - 1.0) / t_next;

        let step: f64;
        if accept {
            // y = z + (t-1)/t' (z - x)
            let diff: Vec<C64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
            step = norm2(&diff);
            for ((yi, zi), di) in y.iter_mut().zip(&z).zip(&diff) {
                *yi = zi + c_x * di;
            }
            for ((ayq, azq), axq) in ay.iter_mut().zip(&az).zip(&ax) {
                for ((a, zz), xx) in ayq.iter_mut().zip(azq).zip(axq) {
                    *a = zz + c_x * (zz - xx);
                }
            }
            std::mem::swap(&mut x, &mut z);
            std::mem::swap(&mut ax, &mut az);
            cost_x = cost_z;
        } else {
            // x stays; y = x + t/t' (z - x)
            step = 0.0;
            for ((yi, zi), xi) in y.iter_mut().zip(&z).zip(&x) {
                *yi = xi + c_z * (zi - xi);
            }
            for ((ayq, azq), axq) in ay.iter_mut().zip(&az).zip(&ax) {
                for ((a, zz), xx) in ayq.iter_mut().zip(azq).zip(axq) {
                    *a = xx + c_z * (zz - xx);
                }
            }
        }
        t = t_next;
        rec.record(cost_x, &x);
        let xn = norm2(&x);
        if accept && xn > 0.0 && step <= cfg.tol * xn {
            converged = true;
            break;
        }
    }
    Ok(rec.finish(x, converged))
}
