use rayon::prelude::*;

use super::config::{KernelConfig, Weighting};
use super::spectrum::{
    canonical, normalize, q_out_of_range, spectrum_kernel_all_p, stacked_gaussian_kernel,
    weighted_kernel,
};
use crate::datamodel::{FeatureSequence, GramMatrix, SequenceRecord};
use crate::error::{Error, Result};

/// Per-length spectrum kernels for every (row, column) pair at one `gamma`,
/// plus the self-kernels of both sides. Weightings are applied afterwards, so
/// one table serves a whole weighting grid.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    rows: usize,
    cols: usize,
    /// Longest per-length array; shorter ones are zero-padded, which is exact
    /// because no subsequence pairs exist beyond the shorter sequence.
    depth: usize,
    per_p: Vec<f64>,
    row_self: Vec<Vec<f64>>,
    col_self: Vec<Vec<f64>>,
    row_lens: Vec<usize>,
    col_lens: Vec<usize>,
    symmetric: bool,
}

fn check_dims(rows: &[FeatureSequence], cols: &[FeatureSequence]) -> Result<()> {
    let Some(first) = rows.first().or(cols.first()) else {
        return Ok(());
    };
    let dim = first.dim();
    let check = |side: &[FeatureSequence], is_row: bool| {
        side.iter().enumerate().try_for_each(|(i, s)| {
            if s.dim() == dim {
                Ok(())
            } else {
                let (row, col) = if is_row { (i, 0) } else { (0, i) };
                Err(Error::GramEntry {
                    row,
                    col,
                    source: Box::new(Error::DimensionMismatch {
                        expected: dim,
                        found: s.dim(),
                    }),
                })
            }
        })
    };
    check(rows, true)?;
    check(cols, false)
}

impl SpectrumTable {
    /// Rows against columns; pass `None` for a self-Gram over `rows`.
    pub fn compute(
        rows: &[FeatureSequence],
        cols: Option<&[FeatureSequence]>,
        gamma: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        let symmetric = cols.is_none();
        let cols = cols.unwrap_or(rows);
        check_dims(rows, cols)?;

        let self_of = |side: &[FeatureSequence]| -> Result<Vec<Vec<f64>>> {
            side.par_iter().map(|s| spectrum_kernel_all_p(s, s, gamma)).collect()
        };
        let row_self = self_of(rows)?;
        let col_self = if symmetric { row_self.clone() } else { self_of(cols)? };
        let depth = rows
            .iter()
            .map(FeatureSequence::len)
            .max()
            .unwrap_or(0)
            .min(cols.iter().map(FeatureSequence::len).max().unwrap_or(0));

        let n_cols = cols.len();
        let row_blocks: Vec<Vec<f64>> = (0..rows.len())
            .into_par_iter()
            .map(|i| {
                let mut block = vec![0.0; n_cols * depth];
                let start = if symmetric { i } else { 0 };
                for j in start..n_cols {
                    let (a, b) = canonical(&rows[i], &cols[j]);
                    let per_p = spectrum_kernel_all_p(a, b, gamma).map_err(|e| {
                        Error::GramEntry {
                            row: i,
                            col: j,
                            source: Box::new(e),
                        }
                    })?;
                    block[j * depth..j * depth + per_p.len()].copy_from_slice(&per_p);
                }
                Ok(block)
            })
            .collect::<Result<_>>()?;
        let mut per_p = row_blocks.concat();
        if symmetric {
            for i in 0..rows.len() {
                for j in 0..i {
                    let (dst, src) = ((i * n_cols + j) * depth, (j * n_cols + i) * depth);
                    per_p.copy_within(src..src + depth, dst);
                }
            }
        }
        Ok(SpectrumTable {
            rows: rows.len(),
            cols: n_cols,
            depth,
            per_p,
            row_self,
            col_self,
            row_lens: rows.iter().map(FeatureSequence::len).collect(),
            col_lens: cols.iter().map(FeatureSequence::len).collect(),
            symmetric,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn per_p(&self, i: usize, j: usize) -> &[f64] {
        let off = (i * self.cols + j) * self.depth;
        &self.per_p[off..off + self.depth]
    }

    /// Row-major kernel matrix under `weighting`, normalized if requested.
    pub fn weighted(&self, weighting: &Weighting, normalize_values: bool) -> Result<Vec<f64>> {
        weighting.validate()?;
        let row_self: Vec<f64> = self.row_self.iter().map(|p| weighted_kernel(p, weighting)).collect();
        let col_self: Vec<f64> = if self.symmetric {
            row_self.clone()
        } else {
            self.col_self.iter().map(|p| weighted_kernel(p, weighting)).collect()
        };
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let min_len = self.row_lens[i].min(self.col_lens[j]);
                let value = if q_out_of_range(weighting, min_len) {
                    0.0
                } else {
                    let raw = weighted_kernel(self.per_p(i, j), weighting);
                    if normalize_values {
                        normalize(raw, row_self[i], col_self[j]).map_err(|e| Error::GramEntry {
                            row: i,
                            col: j,
                            source: Box::new(e),
                        })?
                    } else {
                        raw
                    }
                };
                out.push(value);
            }
        }
        Ok(out)
    }
}

/// Normalized (per `config`) kernel matrix of `rows` against `cols`, or the
/// self-Gram of `rows` when `cols` is `None`. Row-major.
pub fn gram(
    rows: &[FeatureSequence],
    cols: Option<&[FeatureSequence]>,
    config: &KernelConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let longest = rows.iter().chain(cols.unwrap_or(&[])).map(FeatureSequence::len).max();
    config.warn_if_q_exceeds(longest.unwrap_or(0));
    SpectrumTable::compute(rows, cols, config.gamma)?.weighted(&config.weighting, config.normalize)
}

/// Gaussian kernel on stacked vectors for every pair.
pub fn stacked_gram(
    rows: &[FeatureSequence],
    cols: Option<&[FeatureSequence]>,
    gamma: f64,
) -> Result<Vec<f64>> {
    let symmetric = cols.is_none();
    let cols = cols.unwrap_or(rows);
    check_dims(rows, cols)?;
    let blocks: Vec<Vec<f64>> = (0..rows.len())
        .into_par_iter()
        .map(|i| {
            cols.iter()
                .enumerate()
                .map(|(j, c)| {
                    let (a, b) = if symmetric && j < i { (c, &rows[i]) } else { (&rows[i], c) };
                    stacked_gaussian_kernel(a, b, gamma).map_err(|e| Error::GramEntry {
                        row: i,
                        col: j,
                        source: Box::new(e),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(blocks.concat())
}

/// Gram matrix over labeled records, carrying their IDs.
pub fn gram_matrix(
    rows: &[SequenceRecord],
    cols: Option<&[SequenceRecord]>,
    config: &KernelConfig,
) -> Result<GramMatrix> {
    let row_seqs: Vec<FeatureSequence> = rows.iter().map(|r| r.sequence.clone()).collect();
    let row_ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
    match cols {
        None => GramMatrix::square(gram(&row_seqs, None, config)?, row_ids),
        Some(cols) => {
            let col_seqs: Vec<FeatureSequence> = cols.iter().map(|r| r.sequence.clone()).collect();
            let entries = gram(&row_seqs, Some(&col_seqs), config)?;
            GramMatrix::new(entries, row_ids, cols.iter().map(|r| r.id.clone()).collect())
        }
    }
}
