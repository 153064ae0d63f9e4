//! k-space sampling patterns.
//!
//! Coordinates are in cycles per length unit. 1D trajectories keep the second
//! coordinate at zero so every sample can be stored as a `[f64; 2]`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Spatial dimensionality of a trajectory, phantom or model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dims {
    One,
    Two,
}

impl Dims {
    pub fn count(self) -> usize {
        match self {
            Dims::One => 1,
            Dims::Two => 2,
        }
    }

    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Dims::One),
            2 => Ok(Dims::Two),
            _ => Err(Error::invalid(format!("dims must be 1 or 2, got {n}"))),
        }
    }

    /// Number of grid cells in a square grid of side `n`.
    pub fn grid_len(self, n: usize) -> usize {
        n.pow(self.count() as u32)
    }
}

/// Ordered list of k-space sample locations.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dims: Dims,
    points: Vec<[f64; 2]>,
    kmax: f64,
}

impl Trajectory {
    pub fn new(dims: Dims, points: Vec<[f64; 2]>, kmax: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("trajectory needs at least one sample"));
        }
        for (m, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::invalid(format!("sample {m} is not finite")));
            }
            if dims == Dims::One && p[1] != 0.0 {
                return Err(Error::invalid(format!(
                    "1D sample {m} has a nonzero second coordinate"
                )));
            }
        }
        if !(kmax.is_finite() && kmax >= 0.0) {
            return Err(Error::invalid("kmax must be finite and nonnegative"));
        }
        Ok(Trajectory { dims, points, kmax })
    }

    /// 1D trajectory from scalar locations.
    pub fn from_1d(ks: &[f64], kmax: f64) -> Result<Self> {
        Self::new(Dims::One, ks.iter().map(|&k| [k, 0.0]).collect(), kmax)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn kmax(&self) -> f64 {
        self.kmax
    }

    /// Largest sample radius actually present.
    pub fn max_radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max)
    }

    /// Samples concatenated in order; both trajectories must share dims.
    pub fn concat(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                expected: self.dims.count(),
                got: other.dims.count(),
            });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Trajectory::new(self.dims, points, self.kmax.max(other.kmax))
    }

    /// Keeps the samples with every coordinate in `[-bound, bound)`.
    pub fn within_band(&self, bound: f64) -> Result<Trajectory> {
        let inside = |v: f64| v >= -bound && v < bound;
        let points: Vec<[f64; 2]> = self
            .points
            .iter()
            .copied()
            .filter(|p| inside(p[0]) && (self.dims == Dims::One || inside(p[1])))
            .collect();
        Trajectory::new(self.dims, points, self.kmax.min(bound))
    }

    /// Write as CSV with header `kx` (1D) or `kx,ky` (2D).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        match self.dims {
            Dims::One => {
                wtr.write_record(["kx"])?;
                for p in &self.points {
                    wtr.write_record([p[0].to_string()])?;
                }
            }
            Dims::Two => {
                wtr.write_record(["kx", "ky"])?;
                for p in &self.points {
                    wtr.write_record([p[0].to_string(), p[1].to_string()])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Read the CSV format produced by [`Trajectory::write_csv`]. `kmax` is
    /// taken as the largest radius present.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let dims = match headers.iter().collect::<Vec<_>>().as_slice() {
            ["kx"] => Dims::One,
            ["kx", "ky"] => Dims::Two,
            other => {
                return Err(Error::Parse(format!(
                    "trajectory header must be `kx` or `kx,ky`, got {other:?}"
                )))
            }
        };
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("short trajectory row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            let kx = parse(0)?;
            let ky = if dims == Dims::Two { parse(1)? } else { 0.0 };
            points.push([kx, ky]);
        }
        let kmax = points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
        Trajectory::new(dims, points, kmax)
    }
}

fn positive_count(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::invalid(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn positive_real(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be a positive real, got {v}")))
    }
}

/// Uniform `t` on `[0, 1]` with both endpoints; a single sample sits at 0.
fn unit_times(samples: usize) -> impl Iterator<Item = f64> {
    let denom = samples.saturating_sub(1).max(1) as f64;
    (0..samples).map(move |s| s as f64 / denom)
}

/// Full-diameter radial spokes at angles `j pi / num_spokes`.
///
/// Each spoke samples the radius uniformly on `[-kmax, kmax)`, so the
/// k-space origin appears once per spoke.
pub fn make_radial(num_spokes: usize, samples_per_spoke: usize, kmax: f64) -> Result<Trajectory> {
    positive_count("num_spokes", num_spokes)?;
    positive_count("samples_per_spoke", samples_per_spoke)?;
    positive_real("kmax", kmax)?;
    let step = 2.0 * kmax / samples_per_spoke as f64;
    let mut points = Vec::with_capacity(num_spokes * samples_per_spoke);
    for j in 0..num_spokes {
        let theta = j as f64 * PI / num_spokes as f64;
        let (s, c) = theta.sin_cos();
        for i in 0..samples_per_spoke {
            let r = -kmax + i as f64 * step;
            points.push([r * c, r * s]);
        }
    }
    Trajectory::new(Dims::Two, points, kmax)
}

/// Archimedean spiral interleaves `k(t) = kmax t exp(i 2 pi (turns t + j / interleaves))`.
pub fn make_spiral(
    num_interleaves: usize,
    samples_per_readout: usize,
    num_turns: f64,
    kmax: f64,
) -> Result<Trajectory> {
    positive_count("num_interleaves", num_interleaves)?;
    positive_count("samples_per_readout", samples_per_readout)?;
    positive_real("num_turns", num_turns)?;
    positive_real("kmax", kmax)?;
    let mut points = Vec::with_capacity(num_interleaves * samples_per_readout);
    for j in 0..num_interleaves {
        let offset = j as f64 / num_interleaves as f64;
        for t in unit_times(samples_per_readout) {
            let phase = 2.0 * PI * (num_turns * t + offset);
            let r = kmax * t;
            points.push([r * phase.cos(), r * phase.sin()]);
        }
    }
    Trajectory::new(Dims::Two, points, kmax)
}

/// Rosette `k(t) = kmax sin(2 pi w1 t) exp(i 2 pi w2 t)`.
pub fn make_rosette(omega1: f64, omega2: f64, samples: usize, kmax: f64) -> Result<Trajectory> {
    positive_real("omega1", omega1)?;
    positive_real("omega2", omega2)?;
    positive_count("samples", samples)?;
    positive_real("kmax", kmax)?;
    let points = unit_times(samples)
        .map(|t| {
            let r = kmax * (2.0 * PI * omega1 * t).sin();
            let phase = 2.0 * PI * omega2 * t;
            [r * phase.cos(), r * phase.sin()]
        })
        .collect();
    Trajectory::new(Dims::Two, points, kmax)
}

/// Cartesian grid `k = m delta_k`, `m = -N/2 .. N/2-1`, tensor product in 2D
/// (x fastest). `n` must be even.
pub fn make_cartesian(n: usize, delta_k: f64, dims: Dims) -> Result<Trajectory> {
    positive_count("N", n)?;
    if n % 2 != 0 {
        return Err(Error::invalid(format!("Cartesian N must be even, got {n}")));
    }
    positive_real("delta_k", delta_k)?;
    let half = (n / 2) as i64;
    let axis: Vec<f64> = (-half..half).map(|m| m as f64 * delta_k).collect();
    let points = match dims {
        Dims::One => axis.iter().map(|&k| [k, 0.0]).collect(),
        Dims::Two => axis
            .iter()
            .flat_map(|&ky| axis.iter().map(move |&kx| [kx, ky]))
            .collect(),
    };
    Trajectory::new(dims, points, half as f64 * delta_k)
}

/// Replicates every base sample at each offset (offset-major order).
pub fn make_bunched_phase_encoding(base: &Trajectory, offsets: &[[f64; 2]]) -> Result<Trajectory> {
    if offsets.is_empty() {
        return Err(Error::invalid("bunched phase encoding needs at least one offset"));
    }
    if base.dims == Dims::One && offsets.iter().any(|o| o[1] != 0.0) {
        return Err(Error::invalid("1D trajectory offsets must have zero second coordinate"));
    }
    let mut points = Vec::with_capacity(base.len() * offsets.len());
    for off in offsets {
        points.extend(base.points.iter().map(|p| [p[0] + off[0], p[1] + off[1]]));
    }
    let reach = offsets.iter().map(|o| o[0].hypot(o[1])).fold(0.0, f64::max);
    Trajectory::new(base.dims, points, base.kmax + reach)
}
