//! Experimental protocol: per-class sampling, cross-validated parameter
//! selection, repeated runs and accuracy reporting.

mod cv;
mod experiment;
mod metrics;
mod split;

pub use cv::{
    cross_validate, cross_validate_with, stratified_folds, CvGrid, CvOptions, CvOutcome,
    GridScore, KernelRoute,
};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentReport, MeanStd, Method, MethodSummary, RunRecord,
};
pub use metrics::{compute_metrics, Metrics};
pub use split::{sample_split, split_indices, Pixel, SplitSpec};
