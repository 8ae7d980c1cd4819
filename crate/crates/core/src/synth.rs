//! Synthetic scenes: a grid of rectangular tiles, each assigned a class, with
//! a nested inner rectangle per tile. Every class has its own mean spectrum;
//! tiles and inner rectangles add small region-level offsets and every pixel
//! gets independent Gaussian noise.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datamodel::{HyperCube, LabelRaster};
use crate::error::{Error, Result};

/// Standard deviation of the per-tile and per-inner-rectangle mean offsets.
const REGION_OFFSET_STD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub classes: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 4 || self.cols < 4 {
            return Err(Error::invalid(format!(
                "synthetic scenes need at least 4x4 pixels, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.bands == 0 {
            return Err(Error::invalid("synthetic scenes need at least one band"));
        }
        if self.classes < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {}", self.classes)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid(format!("noise_std {} is not a finite value >= 0", self.noise_std)));
        }
        let (tr, tc) = self.tile_grid();
        if tr * tc < self.classes {
            return Err(Error::invalid(format!(
                "a {}x{} scene has room for {} tiles, fewer than {} classes",
                self.rows,
                self.cols,
                tr * tc,
                self.classes
            )));
        }
        Ok(())
    }

    /// Tiles along each axis: roughly 8 pixels per tile, at least 2 tiles.
    fn tile_grid(&self) -> (usize, usize) {
        ((self.rows / 8).max(2), (self.cols / 8).max(2))
    }
}

/// Half-open span of tile `k` out of `n` over `len` pixels.
fn span(k: usize, n: usize, len: usize) -> (usize, usize) {
    (k * len / n, (k + 1) * len / n)
}

pub fn synth(spec: &SynthSpec) -> Result<(HyperCube, LabelRaster)> {
    spec.validate()?;
    let SynthSpec { rows, cols, bands, classes, noise_std, seed } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let class_means: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..bands).map(|_| unit.sample(&mut rng)).collect())
        .collect();

    let (tile_rows, tile_cols) = spec.tile_grid();
    let tiles = tile_rows * tile_cols;
    // every class gets at least one tile
    let mut tile_class: Vec<usize> = (0..tiles).map(|t| t % classes).collect();
    tile_class.shuffle(&mut rng);

    let mut means = vec![0.0; rows * cols * bands];
    let mut labels = vec![0u16; rows * cols];
    for (t, &class) in tile_class.iter().enumerate() {
        let (r0, r1) = span(t / tile_cols, tile_rows, rows);
        let (c0, c1) = span(t % tile_cols, tile_cols, cols);
        let outer: Vec<f64> = class_means[class]
            .iter()
            .map(|m| m + REGION_OFFSET_STD * unit.sample(&mut rng))
            .collect();
        let inner: Vec<f64> = outer
            .iter()
            .map(|m| m + REGION_OFFSET_STD * unit.sample(&mut rng))
            .collect();
        let (h, w) = (r1 - r0, c1 - c0);
        let (ir0, ir1) = (r0 + h / 4, r1 - h / 4);
        let (ic0, ic1) = (c0 + w / 4, c1 - w / 4);
        for r in r0..r1 {
            for c in c0..c1 {
                let p = r * cols + c;
                labels[p] = class as u16 + 1;
                let nested = (ir0..ir1).contains(&r) && (ic0..ic1).contains(&c);
                let mean = if nested { &inner } else { &outer };
                means[p * bands..(p + 1) * bands].copy_from_slice(mean);
            }
        }
    }

    let values: Vec<f64> = means
        .into_iter()
        .map(|m| m + noise_std * unit.sample(&mut rng))
        .collect();
    Ok((
        HyperCube::from_f64(rows, cols, bands, &values)?,
        LabelRaster::new(rows, cols, labels)?,
    ))
}
