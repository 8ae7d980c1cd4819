use rayon::prelude::*;

use super::{compact_ids, Hierarchy};
use crate::datamodel::{FeatureSequence, HyperCube};
use crate::error::{Error, Result};

/// Size and mean spectrum of one region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub pixel_count: usize,
    pub mean_spectrum: Vec<f64>,
}

fn check_shape(hierarchy: &Hierarchy, cube: &HyperCube) -> Result<()> {
    if (hierarchy.rows(), hierarchy.cols()) != (cube.rows(), cube.cols()) {
        return Err(Error::invalid(format!(
            "hierarchy is {}x{} but the cube is {}x{}",
            hierarchy.rows(),
            hierarchy.cols(),
            cube.rows(),
            cube.cols()
        )));
    }
    Ok(())
}

/// Per-pixel index into the level's stats plus the stats themselves.
fn level_stats(ids: &[u32], cube: &HyperCube) -> (Vec<usize>, Vec<RegionStats>) {
    let (dense, k) = compact_ids(ids);
    let bands = cube.bands();
    let mut sums = vec![0.0; k * bands];
    let mut counts = vec![0usize; k];
    for (p, &r) in dense.iter().enumerate() {
        counts[r] += 1;
        for (s, &v) in sums[r * bands..(r + 1) * bands].iter_mut().zip(cube.spectrum_at(p)) {
            *s += f64::from(v);
        }
    }
    let stats = counts
        .iter()
        .enumerate()
        .map(|(r, &n)| RegionStats {
            pixel_count: n,
            mean_spectrum: sums[r * bands..(r + 1) * bands]
                .iter()
                .map(|s| s / n as f64)
                .collect(),
        })
        .collect();
    (dense, stats)
}

/// Stats of every region at zero-based `level`, keyed by region ID.
pub fn region_stats(
    hierarchy: &Hierarchy,
    cube: &HyperCube,
    level: usize,
) -> Result<std::collections::BTreeMap<u32, RegionStats>> {
    check_shape(hierarchy, cube)?;
    if level >= hierarchy.num_levels() {
        return Err(Error::invalid(format!(
            "level {level} out of range ({} levels)",
            hierarchy.num_levels()
        )));
    }
    let ids = hierarchy.level(level);
    let (dense, stats) = level_stats(ids, cube);
    Ok(dense
        .iter()
        .zip(ids)
        .map(|(&r, &id)| (id, stats[r].clone()))
        .collect())
}

/// Precomputed region means for fast per-pixel sequence extraction.
#[derive(Debug, Clone)]
pub struct SequenceExtractor {
    rows: usize,
    cols: usize,
    bands: usize,
    /// `(pixel -> region slot, region means)` per retained level.
    levels: Vec<(Vec<usize>, Vec<RegionStats>)>,
}

impl SequenceExtractor {
    /// Keeps the levels left by [`Hierarchy::retained_levels`] minus
    /// `top_levels_discarded` more from the top.
    pub fn new(hierarchy: &Hierarchy, cube: &HyperCube, top_levels_discarded: usize) -> Result<Self> {
        check_shape(hierarchy, cube)?;
        let retained = hierarchy.retained_levels();
        if top_levels_discarded >= retained {
            return Err(Error::invalid(format!(
                "cannot discard {top_levels_discarded} of {retained} retained levels"
            )));
        }
        let levels = (0..retained - top_levels_discarded)
            .into_par_iter()
            .map(|l| level_stats(hierarchy.level(l), cube))
            .collect();
        Ok(SequenceExtractor {
            rows: cube.rows(),
            cols: cube.cols(),
            bands: cube.bands(),
            levels,
        })
    }

    /// Sequence length produced for every pixel.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn extract(&self, row: usize, col: usize) -> Result<FeatureSequence> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::invalid(format!(
                "pixel ({row}, {col}) out of bounds for a {}x{} image",
                self.rows, self.cols
            )));
        }
        let p = row * self.cols + col;
        let mut data = Vec::with_capacity(self.depth() * self.bands);
        for (slots, stats) in &self.levels {
            data.extend_from_slice(&stats[slots[p]].mean_spectrum);
        }
        FeatureSequence::from_flat(self.bands, data)
    }

    pub fn extract_many(&self, pixels: &[(usize, usize)]) -> Result<Vec<FeatureSequence>> {
        pixels.par_iter().map(|&(r, c)| self.extract(r, c)).collect()
    }
}

/// Mean spectra of the pixel's regions, from the pixel itself up to the
/// coarsest retained level.
pub fn extract_sequence(
    hierarchy: &Hierarchy,
    cube: &HyperCube,
    pixel: (usize, usize),
    top_levels_discarded: usize,
) -> Result<FeatureSequence> {
    SequenceExtractor::new(hierarchy, cube, top_levels_discarded)?.extract(pixel.0, pixel.1)
}

/// Per-dimension z-score transform fitted on a set of sequences.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; dimensions below `1e-12` are only
    /// centered.
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Statistics over every vector of every sequence.
    pub fn fit(sequences: &[FeatureSequence]) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::invalid("cannot standardize an empty sequence set"))?;
        let dim = first.dim();
        if let Some(bad) = sequences.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let total: usize = sequences.iter().map(FeatureSequence::len).sum();
        if total < 2 {
            return Err(Error::invalid("standardization needs at least 2 vectors"));
        }
        let n = total as f64;
        let mut mean = vec![0.0; dim];
        for v in sequences.iter().flat_map(FeatureSequence::iter) {
            mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for v in sequences.iter().flat_map(FeatureSequence::iter) {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt()).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, s: &FeatureSequence) -> Result<FeatureSequence> {
        if s.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: s.dim(),
            });
        }
        Ok(s.map_values(|d, v| {
            let c = v - self.mean[d];
            if self.std[d] < 1e-12 {
                c
            } else {
                c / self.std[d]
            }
        }))
    }

    pub fn apply_all(&self, sequences: &[FeatureSequence]) -> Result<Vec<FeatureSequence>> {
        sequences.iter().map(|s| self.apply(s)).collect()
    }
}

/// Fits a [`Standardizer`] on `sequences` and returns them transformed.
pub fn standardize_features(
    sequences: &[FeatureSequence],
) -> Result<(Vec<FeatureSequence>, Standardizer)> {
    let st = Standardizer::fit(sequences)?;
    Ok((st.apply_all(sequences)?, st))
}
