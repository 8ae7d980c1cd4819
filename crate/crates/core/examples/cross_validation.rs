//! Grid search over kernel width, SVM penalty and weighting on sequences
//! drawn from a synthetic scene.

use hsk::eval::{cross_validate, sample_split, CvGrid, SplitSpec};
use hsk::hierarchy::{power_of_two_ladder, segment_standardized, standardize_features, SequenceExtractor};
use hsk::kernel::Weighting;
use hsk::synth::{synth, SynthSpec};

fn main() -> hsk::Result<()> {
    let (cube, labels) = synth(&SynthSpec { rows: 32, cols: 32, bands: 8, classes: 3, noise_std: 1.1, seed: 5 })?;
    let h = segment_standardized(&cube, &power_of_two_ladder(-2, 8))?;
    let extractor = SequenceExtractor::new(&h, &cube, 0)?;

    let (train, _) = sample_split(&labels, &SplitSpec::new(10, 0))?;
    let (seqs, _) = standardize_features(&extractor.extract_many(&train)?)?;
    let y: Vec<u16> = train.iter().map(|&(r, c)| labels.get(r, c)).collect();

    let grid = CvGrid {
        gammas: power_of_two_ladder(-6, 0),
        cs: power_of_two_ladder(0, 6),
        weightings: vec![
            Weighting::Constant,
            Weighting::QSpectrum { q: 1 },
            Weighting::QSpectrum { q: extractor.depth() },
            Weighting::Decay { lambda: 0.5 },
        ],
    };
    let out = cross_validate(&seqs, &y, &grid, 5)?;
    let mut best_per_weighting = std::collections::BTreeMap::new();
    for s in &out.scores {
        let e = best_per_weighting.entry(s.weighting.to_string()).or_insert(0.0f64);
        *e = e.max(s.mean_accuracy);
    }
    for (w, acc) in best_per_weighting {
        println!("{w:>10}: best fold accuracy {acc:.3}");
    }
    println!(
        "selected gamma {} C {} {} ({:.3})",
        out.best.gamma, out.best.c, out.best.weighting, out.best.mean_accuracy
    );
    Ok(())
}
