//! Runs the protocol on a real scene converted to the cube and label formats.
//!
//! ```text
//! HSK_CUBE=indian_pines.hsc HSK_LABELS=indian_pines_gt.hsl \
//!     cargo run --release --example indian_pines -- 50
//! ```
//!
//! An optional `HSK_HIERARCHY` directory (from `hsk segment` or
//! `hsk import-hierarchy`) replaces the built-in segmentation.

use hsk::datamodel::{read_cube, read_labels};
use hsk::eval::{run_experiment, ExperimentConfig, Method};
use hsk::hierarchy::{power_of_two_ladder, segment_standardized, Hierarchy};

fn main() -> hsk::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (Ok(cube_path), Ok(label_path)) = (std::env::var("HSK_CUBE"), std::env::var("HSK_LABELS")) else {
        eprintln!("set HSK_CUBE and HSK_LABELS to the converted scene");
        std::process::exit(2);
    };
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);

    let cube = read_cube(cube_path)?;
    let labels = read_labels(label_path)?;
    let h = match std::env::var("HSK_HIERARCHY") {
        Ok(dir) => Hierarchy::read_dir(dir)?,
        Err(_) => segment_standardized(&cube, &power_of_two_ladder(-2, 8))?,
    };
    let config = ExperimentConfig {
        n_per_class: n,
        methods: vec![Method::PixelOnly, Method::Stacked, Method::SpectrumQ],
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cube, &h, &labels, &config)?;
    for s in &report.summaries {
        println!(
            "n = {n} {:<12} OA {:5.2} ({:.2})",
            s.method.name(),
            100.0 * s.overall_accuracy.mean,
            100.0 * s.overall_accuracy.std
        );
    }
    Ok(())
}
