use std::path::Path;

use super::io::{dim_u32, put_cstr, put_f64, put_u32, read_file, write_atomic, ByteReader};
use crate::error::{Error, Result};

pub const GRAM_MAGIC: &[u8; 4] = b"HSG1";
/// Rectangular (test x train) variant: separate row and column ID lists.
pub const CROSS_GRAM_MAGIC: &[u8; 4] = b"HSR1";

/// Kernel values between a row sample set and a column sample set.
///
/// A self-Gram has identical row and column IDs and is written in the square
/// `HSG1` layout; anything else uses `HSR1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
}

impl GramMatrix {
    pub fn new(
        entries: Vec<f64>,
        row_ids: Vec<String>,
        col_ids: Vec<String>,
    ) -> Result<Self> {
        let (rows, cols) = (row_ids.len(), col_ids.len());
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(GramMatrix {
            rows,
            cols,
            entries,
            row_ids,
            col_ids,
        })
    }

    pub fn square(entries: Vec<f64>, ids: Vec<String>) -> Result<Self> {
        Self::new(entries, ids.clone(), ids)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn is_self_gram(&self) -> bool {
        self.row_ids == self.col_ids
    }

    /// Largest violation of `|K_ij - K_ji| <= 1e-12 * max(1, |K_ij|)`, or
    /// `None` for non-square matrices.
    pub fn max_asymmetry(&self) -> Option<f64> {
        if self.rows != self.cols {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let a = self.get(i, j);
                let d = (a - self.get(j, i)).abs() / a.abs().max(1.0);
                worst = worst.max(d);
            }
        }
        Some(worst)
    }

    /// Sub-matrix over the given row and column positions.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> GramMatrix {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            let r = self.row(i);
            entries.extend(cols.iter().map(|&j| r[j]));
        }
        GramMatrix {
            rows: rows.len(),
            cols: cols.len(),
            entries,
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
            col_ids: cols.iter().map(|&j| self.col_ids[j].clone()).collect(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(16 + 8 * self.entries.len());
        if self.is_self_gram() {
            out.extend_from_slice(GRAM_MAGIC);
            put_u32(&mut out, dim_u32(self.rows, "sample count")?);
        } else {
            out.extend_from_slice(CROSS_GRAM_MAGIC);
            put_u32(&mut out, dim_u32(self.rows, "row count")?);
            put_u32(&mut out, dim_u32(self.cols, "column count")?);
        }
        for &v in &self.entries {
            put_f64(&mut out, v);
        }
        for id in &self.row_ids {
            put_cstr(&mut out, id)?;
        }
        if !self.is_self_gram() {
            for id in &self.col_ids {
                put_cstr(&mut out, id)?;
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = ByteReader::new(bytes, path);
        let square = bytes.starts_with(GRAM_MAGIC);
        r.magic(if square { GRAM_MAGIC } else { CROSS_GRAM_MAGIC })?;
        let rows = r.u32()? as usize;
        let cols = if square { rows } else { r.u32()? as usize };
        let count = rows
            .checked_mul(cols)
            .filter(|n| n * 8 <= r.remaining())
            .ok_or_else(|| r.error("payload size mismatch"))?;
        let entries = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let row_ids = (0..rows).map(|_| r.cstr()).collect::<Result<Vec<_>>>()?;
        let col_ids = if square {
            row_ids.clone()
        } else {
            (0..cols).map(|_| r.cstr()).collect::<Result<Vec<_>>>()?
        };
        r.finish()?;
        Ok(GramMatrix {
            rows,
            cols,
            entries,
            row_ids,
            col_ids,
        })
    }
}

pub fn read_gram(path: impl AsRef<Path>) -> Result<GramMatrix> {
    let path = path.as_ref();
    GramMatrix::from_bytes(&read_file(path)?, path)
}

pub fn write_gram(gram: &GramMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &gram.to_bytes()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn square_layout() {
        let g = GramMatrix::square(vec![1.0, 0.5, 0.5, 1.0], ids(&["a", "bc"])).unwrap();
        let bytes = g.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"HSG1");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..16], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[40..], b"a\0bc\0");
        assert_eq!(GramMatrix::from_bytes(&bytes, Path::new("g")).unwrap(), g);
        assert_eq!(g.max_asymmetry(), Some(0.0));
    }

    #[test]
    fn cross_layout() {
        let g = GramMatrix::new(vec![0.1, 0.2, 0.3], ids(&["t"]), ids(&["a", "b", "c"])).unwrap();
        let bytes = g.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"HSR1");
        assert_eq!(GramMatrix::from_bytes(&bytes, Path::new("g")).unwrap(), g);
        assert_eq!(g.max_asymmetry(), None);
        let sub = g.select(&[0], &[2, 0]);
        assert_eq!(sub.entries(), &[0.3, 0.1]);
        assert_eq!(sub.col_ids(), &ids(&["c", "a"])[..]);
    }

    #[test]
    fn size_checks() {
        assert!(GramMatrix::square(vec![1.0; 3], ids(&["a", "b"])).is_err());
        let mut bytes = GramMatrix::square(vec![1.0], ids(&["a"])).unwrap().to_bytes().unwrap();
        bytes.push(7);
        assert!(GramMatrix::from_bytes(&bytes, Path::new("g")).is_err());
    }
}
