//! Per-length spectrum kernel values for two short sequences, the three
//! weightings, and the stacked-vector special case.

use hsk::datamodel::FeatureSequence;
use hsk::kernel::oracle::brute_force_spectrum;
use hsk::kernel::{
    normalized_kernel, spectrum_kernel_all_p, stacked_gaussian_kernel, weighted_kernel,
    KernelConfig, Weighting,
};

fn main() -> hsk::Result<()> {
    // pixel, its region, the parent region
    let s = FeatureSequence::new(vec![vec![0.2, 1.0], vec![0.3, 0.9], vec![0.5, 0.5]])?;
    let t = FeatureSequence::new(vec![vec![0.1, 1.1], vec![0.4, 0.8], vec![0.6, 0.4]])?;
    let gamma = 0.5;

    let per_p = spectrum_kernel_all_p(&s, &t, gamma)?;
    let brute = brute_force_spectrum(&s, &t, gamma)?;
    for (p, (dp, bf)) in per_p.iter().zip(&brute).enumerate() {
        println!("p = {}: K = {dp:.6} (enumeration {bf:.6})", p + 1);
    }

    for w in [Weighting::QSpectrum { q: 3 }, Weighting::Constant, Weighting::Decay { lambda: 0.5 }] {
        let raw = weighted_kernel(&per_p, &w);
        let normalized = normalized_kernel(&s, &t, &KernelConfig::new(gamma, w)?)?;
        println!("{w:>10}: raw {raw:.6}, normalized {normalized:.6}");
    }

    println!(
        "stacked Gaussian {:.6} equals q=3 {:.6}",
        stacked_gaussian_kernel(&s, &t, gamma)?,
        per_p[2]
    );
    Ok(())
}
