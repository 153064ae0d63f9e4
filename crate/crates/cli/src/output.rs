//! Image and table writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kspace_core::C64;

pub const F32_MAGIC: &[u8; 4] = b"KSRF";

/// Pixel payload of a `.f32` file.
pub enum Pixels<'a> {
    Real(&'a [f64]),
    Complex(&'a [C64]),
}

/// `.f32` raw image: `KSRF`, then width, height and component count as
/// little-endian `u32`, then little-endian `f32` values row-major (complex
/// values interleaved re, im).
pub fn write_f32(path: &Path, width: usize, height: usize, pixels: Pixels) -> Result<()> {
    let (count, comps) = match &pixels {
        Pixels::Real(v) => (v.len(), 1u32),
        Pixels::Complex(v) => (v.len(), 2u32),
    };
    if count != width * height {
        bail!("{}: {count} pixels for a {width}x{height} image", path.display());
    }
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(F32_MAGIC)?;
    for v in [width as u32, height as u32, comps] {
        w.write_all(&v.to_le_bytes())?;
    }
    match pixels {
        Pixels::Real(v) => {
            for x in v {
                w.write_all(&(*x as f32).to_le_bytes())?;
            }
        }
        Pixels::Complex(v) => {
            for x in v {
                w.write_all(&(x.re as f32).to_le_bytes())?;
                w.write_all(&(x.im as f32).to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a `.f32` file back as `(width, height, components, values)`.
pub fn read_f32(path: &Path) -> Result<(usize, usize, usize, Vec<f32>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() < 16 || &bytes[..4] != F32_MAGIC {
        bail!("{} is not a KSRF file", path.display());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h, c) = (word(4), word(8), word(12));
    let body = &bytes[16..];
    if body.len() != 4 * w * h * c {
        bail!("{}: payload size does not match header", path.display());
    }
    let values = body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    Ok((w, h, c, values))
}

/// Binary 16-bit PGM of `values`, min-max normalized.
pub fn write_pgm(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    if values.len() != width * height {
        bail!("{}: {} pixels for a {width}x{height} image", path.display(), values.len());
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write!(w, "P5\n{width} {height}\n65535\n")?;
    for v in values {
        let q = (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        w.write_all(&q.to_be_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Output directory of one run.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.path(name), text).with_context(|| format!("writing {name}"))
    }

    pub fn csv(&self, name: &str) -> Result<csv::Writer<File>> {
        csv::Writer::from_path(self.path(name)).with_context(|| format!("creating {name}"))
    }

    pub fn file(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name)).with_context(|| format!("creating {name}"))?))
    }

    /// `<stem>.f32` (complex) and `<stem>.pgm` (magnitude) of a square image.
    pub fn image(&self, stem: &str, side: usize, img: &[C64]) -> Result<()> {
        write_f32(&self.path(&format!("{stem}.f32")), side, side, Pixels::Complex(img))?;
        let mag: Vec<f64> = img.iter().map(|v| v.norm()).collect();
        write_pgm(&self.path(&format!("{stem}.pgm")), side, side, &mag)
    }

    /// `<stem>.f32` (real) and `<stem>.pgm` of a real-valued map.
    pub fn real_map(&self, stem: &str, side: usize, map: &[f64]) -> Result<()> {
        write_f32(&self.path(&format!("{stem}.f32")), side, side, Pixels::Real(map))?;
        write_pgm(&self.path(&format!("{stem}.pgm")), side, side, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_round_trip_and_pgm_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.f32");
        let img = [C64::new(1.0, -2.0), C64::new(0.5, 0.25)];
        write_f32(&p, 2, 1, Pixels::Complex(&img)).unwrap();
        let (w, h, c, v) = read_f32(&p).unwrap();
        assert_eq!((w, h, c), (2, 1, 2));
        assert_eq!(v, vec![1.0, -2.0, 0.5, 0.25]);
        assert_eq!(fs::read(&p).unwrap().len(), 16 + 16);

        let g = dir.path().join("a.pgm");
        write_pgm(&g, 2, 2, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        let bytes = fs::read(&g).unwrap();
        let header = b"P5\n2 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..header.len() + 2], &[0, 0]);
        assert_eq!(&bytes[bytes.len() - 2..], &[0xff, 0xff]);
        assert!(write_pgm(&g, 3, 2, &[0.0; 4]).is_err());
    }
}
