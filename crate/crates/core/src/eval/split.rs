use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::LabelRaster;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_per_class: usize,
    pub seed: u64,
    /// Train on half of a class when it has fewer than `2 * n_per_class`
    /// samples.
    pub half_class_rule: bool,
}

impl SplitSpec {
    pub fn new(n_per_class: usize, seed: u64) -> Self {
        SplitSpec {
            n_per_class,
            seed,
            half_class_rule: true,
        }
    }

    /// Training samples taken from a class of `size` samples.
    pub fn train_count(&self, size: usize) -> usize {
        if self.half_class_rule && size < 2 * self.n_per_class {
            size / 2
        } else {
            self.n_per_class.min(size - 1)
        }
    }
}

/// Sample positions grouped by class, background (0) excluded.
pub(crate) fn by_class(labels: &[u16]) -> BTreeMap<u16, Vec<usize>> {
    let mut groups: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate().filter(|(_, &l)| l != 0) {
        groups.entry(l).or_default().push(i);
    }
    groups
}

/// Per-class random train/test split over label positions. Classes are drawn
/// in ascending ID order from a single seeded generator; both returned lists
/// are sorted.
pub fn split_indices(labels: &[u16], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.n_per_class == 0 {
        return Err(Error::invalid("n_per_class must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (class, mut members) in by_class(labels) {
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "class {class} has {} labeled sample(s); at least 2 are required",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let k = spec.train_count(members.len());
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `(row, col)`.
pub type Pixel = (usize, usize);

/// Train and test pixels.
pub fn sample_split(labels: &LabelRaster, spec: &SplitSpec) -> Result<(Vec<Pixel>, Vec<Pixel>)> {
    let (train, test) = split_indices(labels.labels(), spec)?;
    let cols = labels.cols();
    let to_rc = |v: Vec<usize>| v.into_iter().map(|p| (p / cols, p % cols)).collect();
    Ok((to_rc(train), to_rc(test)))
}
