//! Iterative solvers with per-iteration cost and timing records.

mod cg;
mod fista;
mod lsqr;
mod power;
mod tv;

use std::io::Write;
use std::time::Instant;

pub use cg::{cg_tikhonov, cg_tikhonov_gram};
pub use fista::{fista_tv, tv_objective};
pub use lsqr::lsqr_tikhonov;
pub use power::{power_iteration_gram, power_iteration_norm, StackedGram};
pub use tv::TvShape;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Tikhonov weight (CG/LSQR) or TV weight (FISTA).
    pub lambda: f64,
    /// Relative residual at which CG/LSQR stop.
    pub tol: f64,
    pub record_iterates: bool,
    /// Seeds the power-iteration start vector.
    pub seed: u64,
    /// FISTA only: reject steps that increase the objective.
    pub monotone: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 100,
            lambda: 0.0,
            tol: 1e-6,
            record_iterates: false,
            seed: 0,
            monotone: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReconResult {
    pub coefficients: Vec<C64>,
    /// Objective after each iteration.
    pub cost_history: Vec<f64>,
    /// Cumulative wall-clock seconds after each iteration.
    pub time_history: Vec<f64>,
    /// Coefficients after each iteration, when requested.
    pub iterate_snapshots: Vec<Vec<C64>>,
    pub converged: bool,
}

impl ReconResult {
    pub fn iterations(&self) -> usize {
        self.cost_history.len()
    }

    /// Mean seconds per iteration.
    pub fn seconds_per_iteration(&self) -> f64 {
        match self.time_history.last() {
            Some(t) => t / self.time_history.len() as f64,
            None => 0.0,
        }
    }

    /// CSV `iter,cost,cum_seconds`, iterations numbered from 1.
    pub fn write_history_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["iter", "cost", "cum_seconds"])?;
        for (i, (c, t)) in self.cost_history.iter().zip(&self.time_history).enumerate() {
            wtr.write_record([(i + 1).to_string(), c.to_string(), t.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Bookkeeping shared by the solvers.
struct Recorder {
    start: Instant,
    keep: bool,
    result: ReconResult,
}

impl Recorder {
    fn new(keep: bool) -> Self {
        Recorder { start: Instant::now(), keep, result: ReconResult::default() }
    }

    fn record(&mut self, cost: f64, x: &[C64]) {
        self.result.cost_history.push(cost);
        self.result.time_history.push(self.start.elapsed().as_secs_f64());
        if self.keep {
            self.result.iterate_snapshots.push(x.to_vec());
        }
    }

    fn finish(mut self, x: Vec<C64>, converged: bool) -> ReconResult {
        self.result.coefficients = x;
        self.result.converged = converged;
        self.result
    }
}

fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
