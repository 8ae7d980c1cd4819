use std::collections::BTreeMap;
use std::path::Path;

use super::io::{dim_u32, put_u16, put_u32, read_file, write_atomic, ByteReader};
use crate::error::{Error, Result};

pub const LABEL_MAGIC: &[u8; 4] = b"HSL1";
pub const REGION_MAGIC: &[u8; 4] = b"HSH1";

/// Largest class ID a label file may carry. Stored values are 16-bit; the
/// upper half of the range reads as a negative two's-complement label and is
/// rejected.
pub const MAX_LABEL: u16 = i16::MAX as u16;

/// Per-pixel class IDs; 0 marks unlabeled background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    rows: usize,
    cols: usize,
    labels: Vec<u16>,
}

impl LabelRaster {
    pub fn new(rows: usize, cols: usize, labels: Vec<u16>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "label raster dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if labels.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: labels.len(),
            });
        }
        if let Some(i) = labels.iter().position(|&l| l > MAX_LABEL) {
            return Err(Error::invalid(format!(
                "negative label {} at index {i}",
                labels[i] as i16
            )));
        }
        Ok(LabelRaster { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.cols + col]
    }

    /// Pixel count per non-background class, ordered by class ID.
    pub fn class_counts(&self) -> BTreeMap<u16, usize> {
        let mut counts = BTreeMap::new();
        for &l in self.labels.iter().filter(|&&l| l != 0) {
            *counts.entry(l).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(12 + 2 * self.labels.len());
        out.extend_from_slice(LABEL_MAGIC);
        put_u32(&mut out, dim_u32(self.rows, "rows")?);
        put_u32(&mut out, dim_u32(self.cols, "cols")?);
        for &l in &self.labels {
            put_u16(&mut out, l);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = ByteReader::new(bytes, path);
        r.magic(LABEL_MAGIC)?;
        let (rows, cols) = read_dims(&mut r)?;
        if r.remaining() != rows * cols * 2 {
            return Err(r.error(format!(
                "dimension mismatch: header declares {rows}x{cols} labels, payload holds {} bytes",
                r.remaining()
            )));
        }
        let mut labels = Vec::with_capacity(rows * cols);
        for i in 0..rows * cols {
            let l = r.u16()?;
            if l > MAX_LABEL {
                return Err(r.error(format!("negative label {} at index {i}", l as i16)));
            }
            labels.push(l);
        }
        Ok(LabelRaster { rows, cols, labels })
    }
}

fn read_dims(r: &mut ByteReader<'_>) -> Result<(usize, usize)> {
    let rows = r.u32().map_err(|_| r.error("malformed header"))? as usize;
    let cols = r.u32().map_err(|_| r.error("malformed header"))? as usize;
    if rows == 0 || cols == 0 {
        return Err(r.error(format!("malformed header: zero dimension {rows}x{cols}")));
    }
    Ok((rows, cols))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelRaster> {
    let path = path.as_ref();
    LabelRaster::from_bytes(&read_file(path)?, path)
}

pub fn write_labels(labels: &LabelRaster, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &labels.to_bytes()?)
}

/// Region-ID map of one segmentation level (32-bit IDs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    pub rows: usize,
    pub cols: usize,
    pub ids: Vec<u32>,
}

impl RegionMap {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(12 + 4 * self.ids.len());
        out.extend_from_slice(REGION_MAGIC);
        put_u32(&mut out, dim_u32(self.rows, "rows")?);
        put_u32(&mut out, dim_u32(self.cols, "cols")?);
        for &id in &self.ids {
            put_u32(&mut out, id);
        }
        Ok(out)
    }

    /// Accepts either a 32-bit region map or a 16-bit label raster.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.starts_with(LABEL_MAGIC) {
            let raster = LabelRaster::from_bytes(bytes, path)?;
            return Ok(RegionMap {
                rows: raster.rows,
                cols: raster.cols,
                ids: raster.labels.iter().map(|&l| u32::from(l)).collect(),
            });
        }
        let mut r = ByteReader::new(bytes, path);
        r.magic(REGION_MAGIC)?;
        let (rows, cols) = read_dims(&mut r)?;
        if r.remaining() != rows * cols * 4 {
            return Err(r.error(format!(
                "dimension mismatch: header declares {rows}x{cols} regions, payload holds {} bytes",
                r.remaining()
            )));
        }
        let ids = (0..rows * cols).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        Ok(RegionMap { rows, cols, ids })
    }
}

pub fn read_region_map(path: impl AsRef<Path>) -> Result<RegionMap> {
    let path = path.as_ref();
    RegionMap::from_bytes(&read_file(path)?, path)
}

pub fn write_region_map(map: &RegionMap, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &map.to_bytes()?)
}
