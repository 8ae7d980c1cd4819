use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use super::Hierarchy;
use crate::datamodel::HyperCube;
use crate::error::{Error, Result};

/// Candidate merge between two adjacent regions, valid only while both
/// regions still carry the versions recorded here.
#[derive(Debug, Clone, Copy)]
struct Edge {
    cost: f64,
    low: u32,
    high: u32,
    low_version: u32,
    high_version: u32,
}

impl Edge {
    fn key(&self) -> (f64, u32, u32) {
        (self.cost, self.low, self.high)
    }
}

impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Edge {}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Edge {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    }
}

struct Regions {
    bands: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
    versions: Vec<u32>,
    alive: Vec<bool>,
    neighbors: Vec<BTreeSet<u32>>,
    parent: Vec<u32>,
    heap: BinaryHeap<Reverse<Edge>>,
}

impl Regions {
    fn mean(&self, r: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.counts[r] as f64;
        self.sums[r * self.bands..(r + 1) * self.bands].iter().map(move |s| s / n)
    }

    /// Ward-style cost: squared distance of the means scaled by
    /// `|A||B| / (|A| + |B|)`.
    fn cost(&self, a: usize, b: usize) -> f64 {
        let d2: f64 = self.mean(a).zip(self.mean(b)).map(|(x, y)| (x - y) * (x - y)).sum();
        let (na, nb) = (self.counts[a] as f64, self.counts[b] as f64);
        d2 * na * nb / (na + nb)
    }

    fn push_edge(&mut self, a: u32, b: u32) {
        let (low, high) = if a < b { (a, b) } else { (b, a) };
        let edge = Edge {
            cost: self.cost(low as usize, high as usize),
            low,
            high,
            low_version: self.versions[low as usize],
            high_version: self.versions[high as usize],
        };
        self.heap.push(Reverse(edge));
    }

    fn is_current(&self, e: &Edge) -> bool {
        let (l, h) = (e.low as usize, e.high as usize);
        self.alive[l]
            && self.alive[h]
            && self.versions[l] == e.low_version
            && self.versions[h] == e.high_version
    }

    /// Cheapest live edge, discarding stale entries.
    fn peek(&mut self) -> Option<Edge> {
        while let Some(Reverse(e)) = self.heap.peek().copied() {
            if self.is_current(&e) {
                return Some(e);
            }
            self.heap.pop();
        }
        None
    }

    /// Merges `high` into `low`; the merged region keeps the smaller ID.
    fn merge(&mut self, low: u32, high: u32) {
        let (l, h) = (low as usize, high as usize);
        let b = self.bands;
        for k in 0..b {
            self.sums[l * b + k] += self.sums[h * b + k];
        }
        self.counts[l] += self.counts[h];
        self.alive[h] = false;
        self.versions[l] += 1;
        self.parent[h] = low;

        let moved = std::mem::take(&mut self.neighbors[h]);
        for &x in &moved {
            if x == low {
                continue;
            }
            let xs = &mut self.neighbors[x as usize];
            xs.remove(&high);
            xs.insert(low);
            self.neighbors[l].insert(x);
        }
        self.neighbors[l].remove(&high);
        let around: Vec<u32> = self.neighbors[l].iter().copied().collect();
        for x in around {
            self.push_edge(low, x);
        }
    }

    fn find(&mut self, mut p: u32) -> u32 {
        let mut root = p;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[p as usize] != root {
            let next = self.parent[p as usize];
            self.parent[p as usize] = root;
            p = next;
        }
        root
    }
}

pub(crate) fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::invalid(format!("alphas must be positive and finite, got {a}")));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alphas not strictly increasing"));
    }
    Ok(())
}

/// Best-merge region growing over 4-connected regions.
///
/// Level 1 is the pixel partition. Level `l + 1` continues merging from level
/// `l`, always taking the adjacent pair with the smallest Ward cost (ties on
/// the lowest `(min ID, max ID)`), until the cheapest remaining merge costs
/// more than `alphas[l]`. Region IDs are the smallest pixel index they
/// contain.
pub fn segment_values(
    rows: usize,
    cols: usize,
    bands: usize,
    values: &[f64],
    alphas: &[f64],
) -> Result<Hierarchy> {
    validate_alphas(alphas)?;
    let n = rows * cols;
    if n == 0 || bands == 0 {
        return Err(Error::invalid("cannot segment an empty cube"));
    }
    if values.len() != n * bands {
        return Err(Error::DimensionMismatch {
            expected: n * bands,
            found: values.len(),
        });
    }
    if n > u32::MAX as usize {
        return Err(Error::invalid("image too large for 32-bit region IDs"));
    }

    let mut neighbors = vec![BTreeSet::new(); n];
    for r in 0..rows {
        for c in 0..cols {
            let p = (r * cols + c) as u32;
            if c + 1 < cols {
                neighbors[p as usize].insert(p + 1);
                neighbors[p as usize + 1].insert(p);
            }
            if r + 1 < rows {
                let q = p + cols as u32;
                neighbors[p as usize].insert(q);
                neighbors[q as usize].insert(p);
            }
        }
    }
    let mut regions = Regions {
        bands,
        sums: values.to_vec(),
        counts: vec![1; n],
        versions: vec![0; n],
        alive: vec![true; n],
        neighbors,
        parent: (0..n as u32).collect(),
        heap: BinaryHeap::new(),
    };
    for p in 0..n as u32 {
        let higher: Vec<u32> = regions.neighbors[p as usize].range(p + 1..).copied().collect();
        for q in higher {
            regions.push_edge(p, q);
        }
    }

    let mut levels = vec![(0..n as u32).collect::<Vec<u32>>()];
    for &alpha in alphas {
        while let Some(edge) = regions.peek() {
            if edge.cost > alpha {
                break;
            }
            regions.heap.pop();
            regions.merge(edge.low, edge.high);
        }
        let map: Vec<u32> = (0..n as u32).map(|p| regions.find(p)).collect();
        levels.push(map);
    }
    Hierarchy::from_levels(rows, cols, levels, alphas.to_vec())
}

/// Segments the cube's raw values.
pub fn segment(cube: &HyperCube, alphas: &[f64]) -> Result<Hierarchy> {
    let values: Vec<f64> = cube.values().iter().map(|&v| f64::from(v)).collect();
    segment_values(cube.rows(), cube.cols(), cube.bands(), &values, alphas)
}

/// Segments per-band standardized values, so that thresholds do not depend
/// on the data's units.
pub fn segment_standardized(cube: &HyperCube, alphas: &[f64]) -> Result<Hierarchy> {
    segment_values(cube.rows(), cube.cols(), cube.bands(), &cube.standardized(), alphas)
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn power_of_two_ladder(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}
