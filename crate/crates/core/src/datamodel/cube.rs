use std::path::Path;

use super::io::{dim_u32, put_f32, put_u32, read_file, write_atomic, ByteReader};
use crate::error::{Error, Result};

pub const CUBE_MAGIC: &[u8; 4] = b"HSC1";

/// Hyperspectral image stored row-major, band-interleaved-by-pixel.
///
/// Values are kept at the 32-bit precision of the on-disk format so that a
/// write/read cycle is lossless; accessors widen to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    rows: usize,
    cols: usize,
    bands: usize,
    values: Vec<f32>,
}

impl HyperCube {
    pub fn new(rows: usize, cols: usize, bands: usize, values: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(Error::invalid(format!(
                "cube dimensions must be positive, got {rows}x{cols}x{bands}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|v| v.checked_mul(bands))
            .ok_or_else(|| Error::invalid("cube dimensions overflow"))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(HyperCube {
            rows,
            cols,
            bands,
            values,
        })
    }

    /// Builds a cube from `f64` values, rounding each to `f32`.
    pub fn from_f64(rows: usize, cols: usize, bands: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, bands, values.iter().map(|&v| v as f32).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Raw spectrum of the pixel with linear index `index`.
    pub fn spectrum_at(&self, index: usize) -> &[f32] {
        &self.values[index * self.bands..(index + 1) * self.bands]
    }

    pub fn spectrum(&self, row: usize, col: usize) -> Option<Vec<f64>> {
        (row < self.rows && col < self.cols)
            .then(|| self.spectrum_at(row * self.cols + col).iter().map(|&v| f64::from(v)).collect())
    }

    /// Per-band z-scores over all pixels, as `f64`. Bands with (near) zero
    /// spread are only centered.
    pub fn standardized(&self) -> Vec<f64> {
        let n = self.pixel_count() as f64;
        let mut mean = vec![0.0; self.bands];
        for px in self.values.chunks_exact(self.bands) {
            for (m, &v) in mean.iter_mut().zip(px) {
                *m += f64::from(v);
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.bands];
        for px in self.values.chunks_exact(self.bands) {
            for ((s, &v), m) in var.iter_mut().zip(px).zip(&mean) {
                let d = f64::from(v) - m;
                *s += d * d;
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        let mut out = Vec::with_capacity(self.values.len());
        for px in self.values.chunks_exact(self.bands) {
            for ((&v, m), s) in px.iter().zip(&mean).zip(&std) {
                let centered = f64::from(v) - m;
                out.push(if *s < 1e-12 { centered } else { centered / s });
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(16 + 4 * self.values.len());
        out.extend_from_slice(CUBE_MAGIC);
        put_u32(&mut out, dim_u32(self.rows, "rows")?);
        put_u32(&mut out, dim_u32(self.cols, "cols")?);
        put_u32(&mut out, dim_u32(self.bands, "bands")?);
        for &v in &self.values {
            put_f32(&mut out, v);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = ByteReader::new(bytes, path);
        r.magic(CUBE_MAGIC)?;
        let rows = r.u32().map_err(|_| r.error("malformed header"))? as usize;
        let cols = r.u32().map_err(|_| r.error("malformed header"))? as usize;
        let bands = r.u32().map_err(|_| r.error("malformed header"))? as usize;
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(r.error(format!(
                "malformed header: zero dimension {rows}x{cols}x{bands}"
            )));
        }
        let count = rows * cols * bands;
        if r.remaining() != count * 4 {
            return Err(r.error(format!(
                "payload size mismatch: header declares {count} values, payload holds {} bytes",
                r.remaining()
            )));
        }
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let v = r.f32()?;
            if !v.is_finite() {
                return Err(r.error(format!("non-finite value at index {i}")));
            }
            values.push(v);
        }
        Ok(HyperCube {
            rows,
            cols,
            bands,
            values,
        })
    }
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    let path = path.as_ref();
    HyperCube::from_bytes(&read_file(path)?, path)
}

pub fn write_cube(cube: &HyperCube, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &cube.to_bytes()?)
}
