//! Full protocol on a synthetic scene: ten random splits with ten training
//! pixels per class, every method cross-validated and tested on the rest.
//! Writes `results.csv` and `summary.csv` to the working directory.

use hsk::eval::{run_experiment, ExperimentConfig};
use hsk::hierarchy::{power_of_two_ladder, segment_standardized};
use hsk::synth::{synth, SynthSpec};

fn main() -> hsk::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (cube, labels) = synth(&SynthSpec { rows: 32, cols: 32, bands: 8, classes: 3, noise_std: 1.1, seed: 2024 })?;
    let h = segment_standardized(&cube, &power_of_two_ladder(-2, 8))?;
    let report = run_experiment(&cube, &h, &labels, &ExperimentConfig::default())?;

    println!("sequence depth {}", report.p_max);
    for s in &report.summaries {
        println!(
            "{:<16} OA {:5.2} ({:.2})  kappa {:.3}",
            s.method.name(),
            100.0 * s.overall_accuracy.mean,
            100.0 * s.overall_accuracy.std,
            s.kappa.mean
        );
    }
    report.write_csv("results.csv".as_ref(), "summary.csv".as_ref())
}
