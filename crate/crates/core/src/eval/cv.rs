use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::split::by_class;
use crate::datamodel::{FeatureSequence, GramMatrix};
use crate::error::{Error, Result};
use crate::kernel::{stacked_gram, SpectrumTable, Weighting};
use crate::svm;

/// Which kernel the cross-validation evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRoute {
    /// Normalized spectrum kernel under each grid weighting.
    Spectrum,
    /// Gaussian kernel on stacked vectors; grid weightings only label the
    /// result.
    Stacked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvGrid {
    pub gammas: Vec<f64>,
    pub cs: Vec<f64>,
    pub weightings: Vec<Weighting>,
}

impl CvGrid {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.cs.is_empty() || self.weightings.is_empty() {
            return Err(Error::invalid("every cross-validation grid axis needs a value"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::invalid(format!("grid gamma {g} is not positive")));
        }
        if let Some(c) = self.cs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid(format!("grid C {c} is not positive")));
        }
        self.weightings.iter().try_for_each(Weighting::validate)
    }

    /// Grid points in tie-breaking order: smaller gamma, then smaller C,
    /// then smaller weighting parameter.
    fn sorted_axes(&self) -> (Vec<f64>, Vec<f64>, Vec<Weighting>) {
        let mut gammas = self.gammas.clone();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        let mut cs = self.cs.clone();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        let mut ws = self.weightings.clone();
        ws.sort_by(|a, b| {
            let (ka, kb) = (a.order_key(), b.order_key());
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        });
        ws.dedup();
        (gammas, cs, ws)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub tol: f64,
    pub route: KernelRoute,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 0,
            tol: svm::DEFAULT_TOL,
            route: KernelRoute::Spectrum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub gamma: f64,
    pub c: f64,
    pub weighting: Weighting,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best: GridScore,
    /// Every grid point, in tie-breaking order.
    pub scores: Vec<GridScore>,
}

/// Stratified fold index for every sample: each class is shuffled and dealt
/// round-robin over the folds.
pub fn stratified_folds(labels: &[u16], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for (class, mut members) in by_class(labels) {
        if members.len() < folds {
            log::warn!(
                "class {class} has {} samples for {folds} folds; it is missing from some \
                 validation folds",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

/// Mean validation accuracy over the folds that have validation samples.
fn fold_accuracies(
    kernel: &GramMatrix,
    labels: &[u16],
    fold_of: &[usize],
    folds: usize,
    c: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(folds);
    for f in 0..folds {
        let val: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] == f).collect();
        if val.is_empty() {
            continue;
        }
        let fit: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] != f).collect();
        let fit_labels: Vec<u16> = fit.iter().map(|&i| labels[i]).collect();
        let predicted = if fit_labels.iter().all(|&l| l == fit_labels[0]) {
            vec![fit_labels[0]; val.len()]
        } else {
            let model = svm::train(&kernel.select(&fit, &fit), &fit_labels, c, tol)?;
            svm::predict(&model, &kernel.select(&val, &fit))?
        };
        let correct = val.iter().zip(&predicted).filter(|(&i, &p)| labels[i] == p).count();
        out.push(correct as f64 / val.len() as f64);
    }
    Ok(out)
}

/// Grid search by stratified k-fold cross-validation with the spectrum
/// kernel and default options except for `folds`.
pub fn cross_validate(
    sequences: &[FeatureSequence],
    labels: &[u16],
    grid: &CvGrid,
    folds: usize,
) -> Result<CvOutcome> {
    cross_validate_with(
        sequences,
        labels,
        grid,
        &CvOptions {
            folds,
            ..CvOptions::default()
        },
    )
}

/// Evaluates every `(gamma, C, weighting)` point by k-fold cross-validation
/// and returns the point with the highest mean validation accuracy, ties
/// resolved toward smaller gamma, then smaller C, then smaller weighting
/// parameter.
pub fn cross_validate_with(
    sequences: &[FeatureSequence],
    labels: &[u16],
    grid: &CvGrid,
    options: &CvOptions,
) -> Result<CvOutcome> {
    grid.validate()?;
    if sequences.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: sequences.len(),
            found: labels.len(),
        });
    }
    if labels.contains(&0) {
        return Err(Error::invalid("cross-validation samples must be labeled (class 0 found)"));
    }
    if options.folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if by_class(labels).len() < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 classes"));
    }
    let fold_of = stratified_folds(labels, options.folds, options.seed);
    let ids: Vec<String> = (0..labels.len()).map(|i| i.to_string()).collect();
    let (gammas, cs, weightings) = grid.sorted_axes();

    let mut scores = Vec::with_capacity(gammas.len() * cs.len() * weightings.len());
    for &gamma in &gammas {
        let kernels: Vec<GramMatrix> = match options.route {
            KernelRoute::Spectrum => {
                let table = SpectrumTable::compute(sequences, None, gamma)?;
                weightings
                    .iter()
                    .map(|w| GramMatrix::square(table.weighted(w, true)?, ids.clone()))
                    .collect::<Result<_>>()?
            }
            KernelRoute::Stacked => {
                let k = GramMatrix::square(stacked_gram(sequences, None, gamma)?, ids.clone())?;
                vec![k; weightings.len()]
            }
        };
        let points: Vec<(usize, f64)> = cs
            .iter()
            .flat_map(|&c| (0..weightings.len()).map(move |w| (w, c)))
            .collect();
        let evaluated = points
            .par_iter()
            .map(|&(w, c)| {
                let folds = fold_accuracies(&kernels[w], labels, &fold_of, options.folds, c, options.tol)?;
                Ok(GridScore {
                    gamma,
                    c,
                    weighting: weightings[w],
                    mean_accuracy: folds.iter().sum::<f64>() / folds.len() as f64,
                    fold_accuracies: folds,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        scores.extend(evaluated);
    }

    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if s.mean_accuracy.total_cmp(&scores[best].mean_accuracy) == Ordering::Greater {
            best = k;
        }
    }
    Ok(CvOutcome {
        best: scores[best].clone(),
        scores,
    })
}
