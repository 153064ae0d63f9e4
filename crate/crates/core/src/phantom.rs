//! Analytic phantoms with closed-form Fourier transforms.
//!
//! A 2D ellipse is the indicator of `{x : |R(-phi)(x - c) / (a, b)| <= 1}`
//! scaled by a complex amplitude. In 1D an ellipse degenerates to a rect of
//! half-width `a` centered at `c[0]`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::trajectory::{Dims, Trajectory};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    pub amplitude: C64,
}

impl Ellipse {
    pub fn new(center: [f64; 2], a: f64, b: f64, phi: f64, amplitude: C64) -> Result<Self> {
        let e = Ellipse { center, a, b, phi, amplitude };
        e.validate()?;
        Ok(e)
    }

    /// 1D rect of half-width `a` centered at `c`.
    pub fn rect(c: f64, a: f64, amplitude: C64) -> Result<Self> {
        Self::new([c, 0.0], a, a, 0.0, amplitude)
    }

    fn validate(&self) -> Result<()> {
        let finite = self.center.iter().all(|v| v.is_finite())
            && self.phi.is_finite()
            && self.amplitude.re.is_finite()
            && self.amplitude.im.is_finite();
        if !finite {
            return Err(Error::invalid("ellipse parameters must be finite"));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::invalid(format!(
                "ellipse semi-axes must be positive, got a={} b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Whether `x` lies inside the (closed) support.
    pub fn contains(&self, dims: Dims, x: [f64; 2]) -> bool {
        match dims {
            Dims::One => (x[0] - self.center[0]).abs() <= self.a,
            Dims::Two => {
                let (s, c) = self.phi.sin_cos();
                let dx = x[0] - self.center[0];
                let dy = x[1] - self.center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
            }
        }
    }
}

/// `sin(pi u) / (pi u)` with the removable singularity at 0.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - (PI * u).powi(2) / 6.0
    } else {
        let pu = PI * u;
        pu.sin() / pu
    }
}

/// `2 J1(z) / z`, equal to 1 at the origin.
pub fn jinc(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z * z / 8.0
    } else {
        2.0 * libm::j1(z) / z
    }
}

/// Fourier transform of a single ellipse (or rect in 1D) at `k`.
pub fn ellipse_kspace(e: &Ellipse, dims: Dims, k: [f64; 2]) -> C64 {
    match dims {
        Dims::One => {
            let mag = 2.0 * e.a * sinc(2.0 * e.a * k[0]);
            e.amplitude * mag * C64::from_polar(1.0, -2.0 * PI * k[0] * e.center[0])
        }
        Dims::Two => {
            let (s, c) = e.phi.sin_cos();
            let ku = c * k[0] + s * k[1];
            let kv = -s * k[0] + c * k[1];
            let r = (e.a * ku).hypot(e.b * kv);
            let mag = PI * e.a * e.b * jinc(2.0 * PI * r);
            let phase = -2.0 * PI * (k[0] * e.center[0] + k[1] * e.center[1]);
            e.amplitude * mag * C64::from_polar(1.0, phase)
        }
    }
}

/// Fourier transform of a unit point source at `x0`.
pub fn point_source_kspace(x0: [f64; 2], k: [f64; 2]) -> C64 {
    C64::from_polar(1.0, -2.0 * PI * (k[0] * x0[0] + k[1] * x0[1]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipsePhantom {
    dims: Dims,
    ellipses: Vec<Ellipse>,
}

impl EllipsePhantom {
    pub fn new(dims: Dims, ellipses: Vec<Ellipse>) -> Result<Self> {
        for e in &ellipses {
            e.validate()?;
        }
        Ok(EllipsePhantom { dims, ellipses })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn ellipses(&self) -> &[Ellipse] {
        &self.ellipses
    }

    pub fn push(&mut self, e: Ellipse) {
        self.ellipses.push(e);
    }

    /// Union of both ellipse lists.
    pub fn concat(&self, other: &EllipsePhantom) -> Result<EllipsePhantom> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                expected: self.dims.count(),
                got: other.dims.count(),
            });
        }
        let mut ellipses = self.ellipses.clone();
        ellipses.extend_from_slice(&other.ellipses);
        EllipsePhantom::new(self.dims, ellipses)
    }

    pub fn kspace(&self, k: [f64; 2]) -> C64 {
        self.ellipses
            .iter()
            .map(|e| ellipse_kspace(e, self.dims, k))
            .sum()
    }

    /// Image value at `x` (sum of amplitudes of ellipses containing it).
    pub fn value(&self, x: [f64; 2]) -> C64 {
        self.ellipses
            .iter()
            .filter(|e| e.contains(self.dims, x))
            .map(|e| e.amplitude)
            .sum()
    }

    /// Pixel averages on the centered grid `x_n = n dx`, `n = -n/2 .. n/2-1`
    /// (x fastest in 2D), each pixel integrated with `supersample` points
    /// per axis.
    pub fn rasterize(&self, n: usize, dx: f64, supersample: usize) -> Vec<C64> {
        let s = supersample.max(1);
        let offsets: Vec<f64> = (0..s)
            .map(|i| ((i as f64 + 0.5) / s as f64 - 0.5) * dx)
            .collect();
        let half = (n / 2) as f64;
        let centre = |i: usize| (i as f64 - half) * dx;
        match self.dims {
            Dims::One => (0..n)
                .map(|i| {
                    let x = centre(i);
                    let sum: C64 = offsets.iter().map(|o| self.value([x + o, 0.0])).sum();
                    sum / s as f64
                })
                .collect(),
            Dims::Two => {
                let mut out = Vec::with_capacity(n * n);
                for iy in 0..n {
                    let y = centre(iy);
                    for ix in 0..n {
                        let x = centre(ix);
                        let mut sum = C64::new(0.0, 0.0);
                        for oy in &offsets {
                            for ox in &offsets {
                                sum += self.value([x + ox, y + oy]);
                            }
                        }
                        out.push(sum / (s * s) as f64);
                    }
                }
                out
            }
        }
    }

    /// CSV `cx,cy,a,b,phi,amp_re,amp_im` (1D: `cx,a,amp_re,amp_im`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        match self.dims {
            Dims::One => {
                wtr.write_record(["cx", "a", "amp_re", "amp_im"])?;
                for e in &self.ellipses {
                    wtr.write_record(
                        [e.center[0], e.a, e.amplitude.re, e.amplitude.im].map(|v| v.to_string()),
                    )?;
                }
            }
            Dims::Two => {
                wtr.write_record(["cx", "cy", "a", "b", "phi", "amp_re", "amp_im"])?;
                for e in &self.ellipses {
                    wtr.write_record(
                        [
                            e.center[0],
                            e.center[1],
                            e.a,
                            e.b,
                            e.phi,
                            e.amplitude.re,
                            e.amplitude.im,
                        ]
                        .map(|v| v.to_string()),
                    )?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let dims = match headers.len() {
            4 if headers == ["cx", "a", "amp_re", "amp_im"] => Dims::One,
            7 if headers == ["cx", "cy", "a", "b", "phi", "amp_re", "amp_im"] => Dims::Two,
            _ => {
                return Err(Error::Parse(format!(
                    "unexpected phantom header {headers:?}"
                )))
            }
        };
        let mut ellipses = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != headers.len() {
                return Err(Error::Parse("phantom row has wrong field count".into()));
            }
            let e = match dims {
                Dims::One => Ellipse::rect(vals[0], vals[1], C64::new(vals[2], vals[3]))?,
                Dims::Two => Ellipse::new(
                    [vals[0], vals[1]],
                    vals[2],
                    vals[3],
                    vals[4],
                    C64::new(vals[5], vals[6]),
                )?,
            };
            ellipses.push(e);
        }
        EllipsePhantom::new(dims, ellipses)
    }
}

/// Five-ellipse head-like object for a square FOV of side `fov` centered at
/// the origin. All ellipses lie well inside the FOV.
pub fn head_phantom(fov: f64) -> EllipsePhantom {
    let table = [
        // cx, cy, a, b, phi, amp
        (0.0, 0.0, 0.32, 0.40, 0.0, 1.0),
        (0.0, -0.01, 0.28, 0.36, 0.0, -0.6),
        (0.09, 0.0, 0.06, 0.14, -0.3, -0.2),
        (-0.09, 0.0, 0.08, 0.16, 0.3, -0.2),
        (0.0, 0.2, 0.1, 0.07, 0.0, 0.3),
    ];
    let ellipses = table
        .iter()
        .map(|&(cx, cy, a, b, phi, amp)| Ellipse {
            center: [cx * fov, cy * fov],
            a: a * fov,
            b: b * fov,
            phi,
            amplitude: C64::new(amp, 0.0),
        })
        .collect();
    EllipsePhantom { dims: Dims::Two, ellipses }
}

/// Low-intensity ellipse centered at `0.7 fov` along x, entirely outside the
/// FOV `[-fov/2, fov/2)^2`. Amplitude is 5% of the head phantom maximum.
pub fn out_of_fov_ellipse(fov: f64) -> Ellipse {
    Ellipse {
        center: [0.7 * fov, 0.0],
        a: 0.1 * fov,
        b: 0.15 * fov,
        phi: 0.0,
        amplitude: C64::new(0.05, 0.0),
    }
}

/// Samples the phantom's Fourier transform at every trajectory point.
pub fn sample_phantom(p: &EllipsePhantom, t: &Trajectory) -> Result<Vec<C64>> {
    if p.dims != t.dims() {
        return Err(Error::DimsMismatch {
            expected: t.dims().count(),
            got: p.dims.count(),
        });
    }
    if p.ellipses.is_empty() {
        return Err(Error::invalid("phantom has no ellipses"));
    }
    Ok(t.points().iter().map(|&k| p.kspace(k)).collect())
}

/// Adds circular complex Gaussian noise with standard deviation `sigma` per
/// complex sample.
pub fn add_noise(d: &[C64], sigma: f64, seed: u64) -> Result<Vec<C64>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(d.to_vec());
    }
    let normal = Normal::new(0.0, sigma / 2f64.sqrt())
        .map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(d
        .iter()
        .map(|&v| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            v + C64::new(re, im)
        })
        .collect())
}

/// Data CSV `kx[,ky],re,im`.
pub fn write_data_csv<W: Write>(t: &Trajectory, d: &[C64], w: W) -> Result<()> {
    if d.len() != t.len() {
        return Err(Error::LengthMismatch {
            what: "data",
            expected: t.len(),
            got: d.len(),
        });
    }
    let mut wtr = csv::Writer::from_writer(w);
    match t.dims() {
        Dims::One => wtr.write_record(["kx", "re", "im"])?,
        Dims::Two => wtr.write_record(["kx", "ky", "re", "im"])?,
    }
    for (p, v) in t.points().iter().zip(d) {
        match t.dims() {
            Dims::One => wtr.write_record([p[0], v.re, v.im].map(|x| x.to_string()))?,
            Dims::Two => wtr.write_record([p[0], p[1], v.re, v.im].map(|x| x.to_string()))?,
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_data_csv<R: Read>(r: R) -> Result<(Trajectory, Vec<C64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let dims = if headers == ["kx", "re", "im"] {
        Dims::One
    } else if headers == ["kx", "ky", "re", "im"] {
        Dims::Two
    } else {
        return Err(Error::Parse(format!("unexpected data header {headers:?}")));
    };
    let mut points = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        match (dims, vals.as_slice()) {
            (Dims::One, &[kx, re, im]) => {
                points.push([kx, 0.0]);
                data.push(C64::new(re, im));
            }
            (Dims::Two, &[kx, ky, re, im]) => {
                points.push([kx, ky]);
                data.push(C64::new(re, im));
            }
            _ => return Err(Error::Parse("data row has wrong field count".into())),
        }
    }
    let kmax = points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    Ok((Trajectory::new(dims, points, kmax)?, data))
}
