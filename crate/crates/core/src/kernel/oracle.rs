//! Direct enumeration of the spectrum kernel, kept deliberately naive so it
//! can serve as an independent check on the dynamic program.

use std::ops::Range;

use crate::datamodel::FeatureSequence;
use crate::error::{Error, Result};

/// Every contiguous subsequence of a length-`len` sequence, as index ranges,
/// grouped by increasing length and then by start.
pub fn enumerate_subsequences(len: usize) -> Vec<Range<usize>> {
    (1..=len)
        .flat_map(|p| (0..=len - p).map(move |start| start..start + p))
        .collect()
}

/// Per-length kernels computed by pairing every subsequence of `s` with every
/// subsequence of `t` of the same length and multiplying Gaussian atomic
/// kernels node by node.
pub fn brute_force_spectrum(
    s: &FeatureSequence,
    t: &FeatureSequence,
    gamma: f64,
) -> Result<Vec<f64>> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: t.dim(),
        });
    }
    let depth = s.len().min(t.len());
    let mut per_p = vec![0.0; depth];
    let subs_t = enumerate_subsequences(t.len());
    for a in enumerate_subsequences(s.len()) {
        for b in subs_t.iter().filter(|b| b.len() == a.len()) {
            let mut product = 1.0;
            for (i, j) in a.clone().zip(b.clone()) {
                let mut d2 = 0.0;
                for (x, y) in s.get(i).iter().zip(t.get(j)) {
                    d2 += (x - y) * (x - y);
                }
                product *= (-gamma * d2).exp();
            }
            per_p[a.len() - 1] += product;
        }
    }
    Ok(per_p)
}
