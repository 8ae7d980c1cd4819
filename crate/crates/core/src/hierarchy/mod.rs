//! Nested multiscale segmentations and the per-pixel ancestor sequences
//! derived from them.

mod features;
mod segment;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use features::{
    extract_sequence, region_stats, standardize_features, RegionStats, SequenceExtractor,
    Standardizer,
};
pub use segment::{power_of_two_ladder, segment, segment_standardized, segment_values};

use crate::datamodel::{read_region_map, write_atomic, write_region_map, RegionMap};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "hierarchy.txt";
const MANIFEST_HEADER: &str = "hsk-hierarchy 1";

/// Region label maps from fine (index 0) to coarse, with the parent of every
/// region at the next level.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    rows: usize,
    cols: usize,
    levels: Vec<Vec<u32>>,
    parent_links: Vec<BTreeMap<u32, u32>>,
    alphas: Vec<f64>,
}

impl Hierarchy {
    /// Builds a hierarchy from label maps, inferring parent links and
    /// verifying that every region is contained in a single region of the
    /// next level.
    ///
    /// `alphas` holds the threshold that produced each level after the first
    /// and may be empty when unknown.
    pub fn from_levels(
        rows: usize,
        cols: usize,
        levels: Vec<Vec<u32>>,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("a hierarchy needs at least one level"));
        }
        if let Some(bad) = levels.iter().find(|l| l.len() != rows * cols) {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: bad.len(),
            });
        }
        if !alphas.is_empty() {
            if alphas.len() != levels.len() - 1 {
                return Err(Error::invalid(format!(
                    "{} alphas given for {} levels",
                    alphas.len(),
                    levels.len()
                )));
            }
            segment::validate_alphas(&alphas)?;
        }
        let mut parent_links = Vec::with_capacity(levels.len() - 1);
        for (l, pair) in levels.windows(2).enumerate() {
            let mut links = BTreeMap::new();
            for (p, (&child, &parent)) in pair[0].iter().zip(&pair[1]).enumerate() {
                match links.insert(child, parent) {
                    Some(prev) if prev != parent => {
                        return Err(Error::NestingViolation {
                            row: p / cols,
                            col: p % cols,
                            level: l + 1,
                            next: l + 2,
                        })
                    }
                    _ => {}
                }
            }
            parent_links.push(links);
        }
        Ok(Hierarchy {
            rows,
            cols,
            levels,
            parent_links,
            alphas,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Label map of zero-based level `l`.
    pub fn level(&self, l: usize) -> &[u32] {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<u32>] {
        &self.levels
    }

    /// Region at level `l` -> containing region at level `l + 1`.
    pub fn parent_links(&self, l: usize) -> &BTreeMap<u32, u32> {
        &self.parent_links[l]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn region_count(&self, l: usize) -> usize {
        if l + 1 < self.levels.len() {
            self.parent_links[l].len()
        } else {
            let mut ids = self.levels[l].clone();
            ids.sort_unstable();
            ids.dedup();
            ids.len()
        }
    }

    /// Number of levels left after dropping the top levels that cover the
    /// whole image with one region. The finest level is always kept.
    pub fn retained_levels(&self) -> usize {
        let mut keep = self.levels.len();
        while keep > 1 && self.region_count(keep - 1) == 1 {
            keep -= 1;
        }
        keep
    }

    /// Writes one `HSH1` region map per level plus a text manifest.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = format!(
            "{MANIFEST_HEADER}\nrows {}\ncols {}\n",
            self.rows, self.cols
        );
        for (l, ids) in self.levels.iter().enumerate() {
            let name = format!("level_{l:02}.hsh");
            write_region_map(
                &RegionMap {
                    rows: self.rows,
                    cols: self.cols,
                    ids: ids.clone(),
                },
                dir.join(&name),
            )?;
            let _ = write!(manifest, "level {name}");
            if l > 0 {
                if let Some(a) = self.alphas.get(l - 1) {
                    let _ = write!(manifest, " {a}");
                }
            }
            manifest.push('\n');
        }
        write_atomic(&dir.join(MANIFEST_FILE), manifest.as_bytes())
    }

    /// Reads a directory written by [`Hierarchy::write_dir`].
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let bad = |msg: String| Error::format(&manifest_path, msg);
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(bad(format!("expected header {MANIFEST_HEADER:?}")));
        }
        let mut paths = Vec::new();
        let mut alphas = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["rows" | "cols", _] => {}
                ["level", name] => paths.push(dir.join(name)),
                ["level", name, alpha] => {
                    paths.push(dir.join(name));
                    alphas.push(
                        alpha
                            .parse::<f64>()
                            .map_err(|_| bad(format!("bad alpha {alpha:?}")))?,
                    );
                }
                _ => return Err(bad(format!("unrecognized line {line:?}"))),
            }
        }
        let imported = import_hierarchy(&paths)?;
        Hierarchy::from_levels(imported.rows, imported.cols, imported.levels, alphas)
    }
}

/// Loads externally produced label maps (fine to coarse) as a hierarchy.
pub fn import_hierarchy<P: AsRef<Path>>(label_map_paths: &[P]) -> Result<Hierarchy> {
    let maps = label_map_paths
        .iter()
        .map(read_region_map)
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = maps.first() else {
        return Err(Error::invalid("no label maps given"));
    };
    let (rows, cols) = (first.rows, first.cols);
    for (map, path) in maps.iter().zip(label_map_paths) {
        if (map.rows, map.cols) != (rows, cols) {
            return Err(Error::format(
                PathBuf::from(path.as_ref()),
                format!(
                    "size {}x{} differs from the first level's {rows}x{cols}",
                    map.rows, map.cols
                ),
            ));
        }
    }
    Hierarchy::from_levels(rows, cols, maps.into_iter().map(|m| m.ids).collect(), Vec::new())
}

/// Dense `0..k` renumbering of a level's region IDs, in first-seen order.
pub(crate) fn compact_ids(ids: &[u32]) -> (Vec<usize>, usize) {
    let mut index = HashMap::new();
    let dense = ids
        .iter()
        .map(|id| {
            let next = index.len();
            *index.entry(*id).or_insert(next)
        })
        .collect();
    (dense, index.len())
}
