use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::cv::{cross_validate_with, CvGrid, CvOptions, KernelRoute};
use super::metrics::{compute_metrics, Metrics};
use super::split::{split_indices, SplitSpec};
use crate::datamodel::{write_atomic, FeatureSequence, GramMatrix, HyperCube, LabelRaster};
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, SequenceExtractor, Standardizer};
use crate::hierarchy::power_of_two_ladder;
use crate::kernel::{gram, stacked_gram, KernelConfig, Weighting};
use crate::svm;

/// Classification method compared by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Gaussian kernel on the pixel spectrum alone.
    PixelOnly,
    /// Gaussian kernel on the stacked vector of all levels.
    Stacked,
    SpectrumConstant,
    SpectrumQ,
    SpectrumDecay,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::PixelOnly,
        Method::Stacked,
        Method::SpectrumConstant,
        Method::SpectrumQ,
        Method::SpectrumDecay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::PixelOnly => "pixel",
            Method::Stacked => "stacked",
            Method::SpectrumConstant => "spectrum-c",
            Method::SpectrumQ => "spectrum-q",
            Method::SpectrumDecay => "spectrum-lambda",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pixel" | "pixel-only" => Method::PixelOnly,
            "stacked" => Method::Stacked,
            "spectrum-c" | "const" => Method::SpectrumConstant,
            "spectrum-q" | "q" => Method::SpectrumQ,
            "spectrum-lambda" | "spectrum-λ" | "decay" => Method::SpectrumDecay,
            _ => {
                return Err(Error::invalid(format!(
                    "unknown method {s:?}; expected pixel, stacked, spectrum-c, spectrum-q or \
                     spectrum-lambda"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_per_class: usize,
    pub repetitions: usize,
    /// Repetition `r` uses seed `seed + r` for its split and folds.
    pub seed: u64,
    pub folds: usize,
    pub half_class_rule: bool,
    pub top_levels_discarded: usize,
    pub gammas: Vec<f64>,
    pub cs: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// q-spectrum lengths to try; all lengths `1..=p_max` when `None`.
    pub q_values: Option<Vec<usize>>,
    pub methods: Vec<Method>,
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_per_class: 10,
            repetitions: 10,
            seed: 0,
            folds: 5,
            half_class_rule: true,
            top_levels_discarded: 0,
            gammas: power_of_two_ladder(-6, 4),
            cs: power_of_two_ladder(-2, 10),
            lambdas: (1..=9).map(|k| k as f64 / 10.0).collect(),
            q_values: None,
            methods: Method::ALL.to_vec(),
            tol: svm::DEFAULT_TOL,
        }
    }
}

impl ExperimentConfig {
    fn grid(&self, method: Method, p_max: usize) -> CvGrid {
        let weightings = match method {
            Method::PixelOnly | Method::SpectrumConstant => vec![Weighting::Constant],
            Method::Stacked => vec![Weighting::QSpectrum { q: p_max }],
            Method::SpectrumQ => self
                .q_values
                .clone()
                .unwrap_or_else(|| (1..=p_max).collect())
                .into_iter()
                .map(|q| Weighting::QSpectrum { q })
                .collect(),
            Method::SpectrumDecay => self
                .lambdas
                .iter()
                .map(|&lambda| Weighting::Decay { lambda })
                .collect(),
        };
        CvGrid {
            gammas: self.gammas.clone(),
            cs: self.cs.clone(),
            weightings,
        }
    }
}

/// Outcome of one method on one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub n_per_class: usize,
    pub repetition: usize,
    pub metrics: Metrics,
    pub gamma: f64,
    pub c: f64,
    pub weighting: Weighting,
    pub cv_accuracy: f64,
    pub predictions: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (`n - 1`); 0 for a single repetition.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub n_per_class: usize,
    pub repetitions: usize,
    pub overall_accuracy: MeanStd,
    pub average_accuracy: MeanStd,
    pub kappa: MeanStd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub p_max: usize,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<MethodSummary>,
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn records_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record([
            "method", "n", "repetition", "OA", "AA", "kappa", "gamma", "C", "weighting", "cv_OA",
        ])
        .map_err(err)?;
        for r in &self.records {
            w.write_record([
                r.method.name().to_string(),
                r.n_per_class.to_string(),
                r.repetition.to_string(),
                r.metrics.overall_accuracy.to_string(),
                r.metrics.average_accuracy.to_string(),
                r.metrics.kappa.to_string(),
                r.gamma.to_string(),
                r.c.to_string(),
                r.weighting.to_string(),
                r.cv_accuracy.to_string(),
            ])
            .map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
    }

    /// Means and standard deviations in percent, one row per method.
    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record([
            "method", "n", "repetitions", "OA_mean", "OA_std", "AA_mean", "AA_std", "kappa_mean",
            "kappa_std",
        ])
        .map_err(err)?;
        for s in &self.summaries {
            let pct = |v: f64| format!("{:.2}", 100.0 * v);
            w.write_record([
                s.method.name().to_string(),
                s.n_per_class.to_string(),
                s.repetitions.to_string(),
                pct(s.overall_accuracy.mean),
                pct(s.overall_accuracy.std),
                pct(s.average_accuracy.mean),
                pct(s.average_accuracy.std),
                format!("{:.4}", s.kappa.mean),
                format!("{:.4}", s.kappa.std),
            ])
            .map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
    }

    pub fn write_csv(&self, records: &Path, summary: &Path) -> Result<()> {
        write_atomic(records, &self.records_csv()?)?;
        write_atomic(summary, &self.summary_csv()?)
    }
}

/// Kernel matrix for `method` between `rows` and `cols` (self when `None`).
fn method_kernel(
    route: KernelRoute,
    rows: &[FeatureSequence],
    cols: Option<&[FeatureSequence]>,
    gamma: f64,
    weighting: Weighting,
) -> Result<Vec<f64>> {
    match route {
        KernelRoute::Spectrum => gram(rows, cols, &KernelConfig::new(gamma, weighting)?),
        KernelRoute::Stacked => stacked_gram(rows, cols, gamma),
    }
}

/// Trains on `train` with cross-validated parameters and classifies `test`.
#[allow(clippy::too_many_arguments)]
fn run_method(
    method: Method,
    config: &ExperimentConfig,
    p_max: usize,
    seed: u64,
    train: &[FeatureSequence],
    train_labels: &[u16],
    test: &[FeatureSequence],
) -> Result<(super::cv::GridScore, Vec<u16>)> {
    let depth = if method == Method::PixelOnly { 1 } else { p_max };
    let train: Vec<FeatureSequence> = train.iter().map(|s| s.truncated(depth)).collect();
    let test: Vec<FeatureSequence> = test.iter().map(|s| s.truncated(depth)).collect();
    let standardizer = Standardizer::fit(&train)?;
    let train = standardizer.apply_all(&train)?;
    let test = standardizer.apply_all(&test)?;

    let route = if method == Method::Stacked {
        KernelRoute::Stacked
    } else {
        KernelRoute::Spectrum
    };
    let options = CvOptions {
        folds: config.folds,
        seed,
        tol: config.tol,
        route,
    };
    let cv = cross_validate_with(&train, train_labels, &config.grid(method, p_max), &options)?;
    let best = cv.best;

    let train_ids: Vec<String> = (0..train.len()).map(|i| format!("train{i}")).collect();
    let test_ids: Vec<String> = (0..test.len()).map(|i| format!("test{i}")).collect();
    let k_train = GramMatrix::square(
        method_kernel(route, &train, None, best.gamma, best.weighting)?,
        train_ids.clone(),
    )?;
    let model = svm::train(&k_train, train_labels, best.c, config.tol)?;
    let k_test = GramMatrix::new(
        method_kernel(route, &test, Some(&train), best.gamma, best.weighting)?,
        test_ids,
        train_ids,
    )?;
    let predictions = svm::predict(&model, &k_test)?;
    Ok((best, predictions))
}

/// Repeated split / standardize / cross-validate / train / predict runs for
/// every configured method. All methods of a repetition share its split.
pub fn run_experiment(
    cube: &HyperCube,
    hierarchy: &Hierarchy,
    labels: &LabelRaster,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if config.repetitions == 0 || config.methods.is_empty() {
        return Err(Error::invalid("an experiment needs at least one repetition and one method"));
    }
    if (labels.rows(), labels.cols()) != (cube.rows(), cube.cols()) {
        return Err(Error::invalid(format!(
            "labels are {}x{} but the cube is {}x{}",
            labels.rows(),
            labels.cols(),
            cube.rows(),
            cube.cols()
        )));
    }
    let extractor = SequenceExtractor::new(hierarchy, cube, config.top_levels_discarded)?;
    let p_max = extractor.depth();
    let cols = labels.cols();
    let sequences_at = |idx: &[usize]| {
        let pixels: Vec<(usize, usize)> = idx.iter().map(|&p| (p / cols, p % cols)).collect();
        extractor.extract_many(&pixels)
    };

    let mut records = Vec::new();
    for repetition in 0..config.repetitions {
        let seed = config.seed.wrapping_add(repetition as u64);
        let wrap = |e: Error| Error::Repetition {
            repetition,
            source: Box::new(e),
        };
        let spec = SplitSpec {
            n_per_class: config.n_per_class,
            seed,
            half_class_rule: config.half_class_rule,
        };
        let (train_idx, test_idx) = split_indices(labels.labels(), &spec).map_err(wrap)?;
        debug_assert!(train_idx.iter().all(|i| test_idx.binary_search(i).is_err()));
        let train = sequences_at(&train_idx).map_err(wrap)?;
        let test = sequences_at(&test_idx).map_err(wrap)?;
        let train_labels: Vec<u16> = train_idx.iter().map(|&p| labels.labels()[p]).collect();
        let truth: Vec<u16> = test_idx.iter().map(|&p| labels.labels()[p]).collect();

        for &method in &config.methods {
            let (best, predictions) =
                run_method(method, config, p_max, seed, &train, &train_labels, &test)
                    .map_err(wrap)?;
            let metrics = compute_metrics(&predictions, &truth).map_err(wrap)?;
            log::info!(
                "repetition {repetition} {method}: OA {:.4} (gamma {}, C {}, {})",
                metrics.overall_accuracy,
                best.gamma,
                best.c,
                best.weighting
            );
            records.push(RunRecord {
                method,
                n_per_class: config.n_per_class,
                repetition,
                metrics,
                gamma: best.gamma,
                c: best.c,
                weighting: best.weighting,
                cv_accuracy: best.mean_accuracy,
                predictions,
            });
        }
    }

    let summaries = config
        .methods
        .iter()
        .map(|&method| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.method == method).collect();
            let collect = |f: fn(&Metrics) -> f64| {
                MeanStd::of(&runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>())
            };
            MethodSummary {
                method,
                n_per_class: config.n_per_class,
                repetitions: runs.len(),
                overall_accuracy: collect(|m| m.overall_accuracy),
                average_accuracy: collect(|m| m.average_accuracy),
                kappa: collect(|m| m.kappa),
            }
        })
        .collect();
    Ok(ExperimentReport {
        p_max,
        records,
        summaries,
    })
}
