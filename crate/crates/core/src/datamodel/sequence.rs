use std::path::Path;

use super::io::{dim_u32, put_cstr, put_f32, put_u16, put_u32, read_file, write_atomic, ByteReader};
use crate::error::{Error, Result};

pub const SEQUENCE_MAGIC: &[u8; 4] = b"HSQ1";

/// Feature vectors of a pixel's regions, ordered from the pixel itself up to
/// the coarsest retained ancestor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    dim: usize,
    data: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("feature sequence must contain at least one vector"))?;
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Self::from_flat(dim, data)
    }

    /// `data` holds `len * dim` values, one vector after another.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "feature sequence needs a positive dimension and a whole number of vectors \
                 (dim {dim}, {} values)",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value at index {i}")));
        }
        Ok(FeatureSequence { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Vector at zero-based level `i` (0 = pixel level).
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// All vectors concatenated (the stacked representation).
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// First `len` levels; returns the whole sequence when `len` exceeds it.
    pub fn truncated(&self, len: usize) -> FeatureSequence {
        let len = len.clamp(1, self.len());
        FeatureSequence {
            dim: self.dim,
            data: self.data[..len * self.dim].to_vec(),
        }
    }

    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> FeatureSequence {
        let dim = self.dim;
        FeatureSequence {
            dim,
            data: self.data.iter().enumerate().map(|(i, &v)| f(i % dim, v)).collect(),
        }
    }
}

/// One labeled sample as stored in a sequence file.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub id: String,
    /// Class ID, 0 when unlabeled.
    pub label: u16,
    pub sequence: FeatureSequence,
}

pub fn sequences_to_bytes(records: &[SequenceRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(SEQUENCE_MAGIC);
    put_u32(&mut out, dim_u32(records.len(), "sequence count")?);
    for rec in records {
        put_u32(&mut out, dim_u32(rec.sequence.len(), "sequence length")?);
        put_u32(&mut out, dim_u32(rec.sequence.dim(), "feature dimension")?);
        put_cstr(&mut out, &rec.id)?;
        put_u16(&mut out, rec.label);
        for &v in rec.sequence.as_flat() {
            put_f32(&mut out, v as f32);
        }
    }
    Ok(out)
}

pub fn sequences_from_bytes(bytes: &[u8], path: &Path) -> Result<Vec<SequenceRecord>> {
    let mut r = ByteReader::new(bytes, path);
    r.magic(SEQUENCE_MAGIC)?;
    let count = r.u32()? as usize;
    let mut records = Vec::with_capacity(count.min(1 << 20));
    for k in 0..count {
        let len = r.u32()? as usize;
        let dim = r.u32()? as usize;
        let id = r.cstr()?;
        let label = r.u16()?;
        if len == 0 || dim == 0 {
            return Err(r.error(format!("sequence {k} ({id}) has zero length or dimension")));
        }
        let n = len
            .checked_mul(dim)
            .filter(|n| n * 4 <= r.remaining())
            .ok_or_else(|| r.error(format!("sequence {k} ({id}) exceeds the payload")))?;
        let data = (0..n)
            .map(|_| r.f32().map(f64::from))
            .collect::<Result<Vec<_>>>()?;
        let sequence = FeatureSequence::from_flat(dim, data)
            .map_err(|e| r.error(format!("sequence {k} ({id}): {e}")))?;
        records.push(SequenceRecord { id, label, sequence });
    }
    r.finish()?;
    Ok(records)
}

pub fn read_sequences(path: impl AsRef<Path>) -> Result<Vec<SequenceRecord>> {
    let path = path.as_ref();
    sequences_from_bytes(&read_file(path)?, path)
}

pub fn write_sequences(records: &[SequenceRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &sequences_to_bytes(records)?)
}
