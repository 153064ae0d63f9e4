use super::{Recorder, ReconResult, SolveConfig};
use crate::error::{Error, Result};
use crate::operators::linear::{norm2, LinearOperator};
use crate::C64;

fn scale(v: &mut [C64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Damped LSQR (Paige and Saunders) for `|A x - d|^2 + lambda |x|^2`.
///
/// The recorded cost is the running estimate `|r|^2 + lambda |x|^2` from the
/// bidiagonalization; stopping uses the normal-equation residual relative to
/// `|A^H d|`.
pub fn lsqr_tikhonov<A: LinearOperator + ?Sized>(op: &A, d: &[C64], cfg: &SolveConfig) -> Result<ReconResult> {
    cfg.validate()?;
    if d.len() != op.nrows() {
        return Err(Error::LengthMismatch {
            what: "data",
            expected: op.nrows(),
            got: d.len(),
        });
    }
    let n = op.ncols();
    let damp = cfg.lambda.sqrt();
    let mut rec = Recorder::new(cfg.record_iterates);
    let mut x = vec![C64::new(0.0, 0.0); n];

    let mut u = d.to_vec();
    let mut beta = norm2(&u);
    if beta == 0.0 {
        rec.record(0.0, &x);
        return Ok(rec.finish(x, true));
    }
    scale(&mut u, 1.0 / beta);
    let mut v = op.adjoint(&u);
    let mut alpha = norm2(&v);
    if alpha == 0.0 {
        rec.record(beta * beta, &x);
        return Ok(rec.finish(x, true));
    }
    scale(&mut v, 1.0 / alpha);
    let atb_norm = alpha * beta;
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut res2 = 0.0;
    let mut av = vec![C64::new(0.0, 0.0); op.nrows()];
    let mut ahu = vec![C64::new(0.0, 0.0); n];
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        op.apply_into(&v, &mut av);
        for (ui, ai) in u.iter_mut().zip(&av) {
            *ui = ai - alpha * *ui;
        }
        beta = norm2(&u);
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
            op.adjoint_into(&u, &mut ahu);
            for (vi, ai) in v.iter_mut().zip(&ahu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm2(&v);
            if alpha > 0.0 {
                scale(&mut v, 1.0 / alpha);
            }
        }

        // eliminate the damping term
        let rhobar1 = rhobar.hypot(damp);
        let cs1 = rhobar / rhobar1;
        let sn1 = damp / rhobar1;
        let psi = sn1 * phibar;
        phibar *= cs1;

        // eliminate the subdiagonal of the bidiagonal matrix
        let rho = rhobar1.hypot(beta);
        let cs = rhobar1 / rho;
        let sn = beta / rho;
        let theta = sn * alpha;
        rhobar = -cs * alpha;
        let phi = cs * phibar;
        phibar *= sn;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for (xi, wi) in x.iter_mut().zip(w.iter_mut()) {
            *xi += t1 * *wi;
            *wi = t2 * *wi;
        }
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi;
        }

        res2 += psi * psi;
        rec.record(phibar * phibar + res2, &x);

        let arnorm = alpha * (cs * phibar).abs();
        if arnorm <= cfg.tol * atb_norm || beta == 0.0 || alpha == 0.0 {
            converged = true;
            break;
        }
    }
    Ok(rec.finish(x, converged))
}
