//! Region hierarchy of a synthetic scene and the sequence of one pixel.

use hsk::hierarchy::{power_of_two_ladder, region_stats, segment_standardized, extract_sequence};
use hsk::synth::{synth, SynthSpec};

fn main() -> hsk::Result<()> {
    let (cube, _) = synth(&SynthSpec { rows: 32, cols: 32, bands: 8, classes: 3, noise_std: 1.1, seed: 1 })?;
    let h = segment_standardized(&cube, &power_of_two_ladder(-2, 8))?;
    for l in 0..h.num_levels() {
        let alpha = l.checked_sub(1).map_or("-".to_string(), |i| h.alphas()[i].to_string());
        println!("level {l:2} alpha {alpha:>6}: {:4} regions", h.region_count(l));
    }
    println!("{} levels kept for sequences", h.retained_levels());

    let top = h.retained_levels() - 1;
    let stats = region_stats(&h, &cube, top)?;
    for (id, s) in stats.iter().take(3) {
        println!("top region {id}: {} pixels, band 0 mean {:.3}", s.pixel_count, s.mean_spectrum[0]);
    }

    let seq = extract_sequence(&h, &cube, (5, 5), 0)?;
    println!("pixel (5,5): {} nodes of dimension {}", seq.len(), seq.dim());
    Ok(())
}
