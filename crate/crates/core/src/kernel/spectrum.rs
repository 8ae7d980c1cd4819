use std::cmp::Ordering;

use super::config::{KernelConfig, Weighting};
use crate::datamodel::FeatureSequence;
use crate::error::{Error, Result};

/// Sequences longer than this are always combined in log space.
const LOG_SPACE_MIN_LEN: usize = 32;
/// Atomic values below this switch the recursion to log space.
const LOG_SPACE_MIN_VALUE: f64 = 1e-300;

/// Kernel between two region feature vectors.
pub trait AtomicKernel {
    /// Natural logarithm of the kernel value.
    fn log_eval(&self, x: &[f64], y: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub gamma: f64,
}

impl AtomicKernel for Gaussian {
    fn log_eval(&self, x: &[f64], y: &[f64]) -> f64 {
        -self.gamma * squared_distance(x, y)
    }
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-gamma * ||x - y||^2)`.
pub fn atomic_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(Gaussian { gamma }.log_eval(x, y).exp())
}

fn check_pair(s: &FeatureSequence, t: &FeatureSequence) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: t.dim(),
        });
    }
    Ok(())
}

/// All p-spectrum kernels `K(S_p, S'_p)` for `p = 1..=min(|S|, |S'|)`, with
/// the Gaussian atomic kernel.
pub fn spectrum_kernel_all_p(
    s: &FeatureSequence,
    t: &FeatureSequence,
    gamma: f64,
) -> Result<Vec<f64>> {
    spectrum_kernel_all_p_with(s, t, &Gaussian { gamma })
}

/// Dynamic program over the matrix `M[i][i'][p]`, where entry `(i, i', p)` is
/// the product kernel of the length-`p` subsequences ending at `i` and `i'`.
///
/// Each atomic value is evaluated exactly once (`|S| * |S'|` calls) and the
/// recursion `M[i][i'][p] = k(n_i, n'_i') * M[i-1][i'-1][p-1]` runs with
/// `M[.][.][0] = 1`. Only the planes for `p - 1` and `p` are kept.
pub fn spectrum_kernel_all_p_with<K: AtomicKernel + ?Sized>(
    s: &FeatureSequence,
    t: &FeatureSequence,
    atomic: &K,
) -> Result<Vec<f64>> {
    check_pair(s, t)?;
    let (n, m) = (s.len(), t.len());
    let depth = n.min(m);

    let mut log_k = Vec::with_capacity(n * m);
    for x in s.iter() {
        for y in t.iter() {
            log_k.push(atomic.log_eval(x, y));
        }
    }
    let log_space = n.max(m) > LOG_SPACE_MIN_LEN
        || log_k.iter().any(|&l| l.exp() < LOG_SPACE_MIN_VALUE);

    let mut per_p = Vec::with_capacity(depth);
    if log_space {
        let mut prev = log_k.clone();
        per_p.push(prev.iter().map(|l| l.exp()).sum());
        let mut cur = vec![f64::NEG_INFINITY; n * m];
        for p in 1..depth {
            let mut sum = 0.0;
            for i in p..n {
                for j in p..m {
                    let v = log_k[i * m + j] + prev[(i - 1) * m + (j - 1)];
                    cur[i * m + j] = v;
                    sum += v.exp();
                }
            }
            per_p.push(sum);
            std::mem::swap(&mut prev, &mut cur);
        }
    } else {
        let k: Vec<f64> = log_k.iter().map(|l| l.exp()).collect();
        per_p.push(k.iter().sum());
        let mut prev = k.clone();
        let mut cur = vec![0.0; n * m];
        for p in 1..depth {
            let mut sum = 0.0;
            for i in p..n {
                for j in p..m {
                    let v = k[i * m + j] * prev[(i - 1) * m + (j - 1)];
                    cur[i * m + j] = v;
                    sum += v;
                }
            }
            per_p.push(sum);
            std::mem::swap(&mut prev, &mut cur);
        }
    }
    Ok(per_p)
}

/// Combines per-length kernels `per_p[p - 1]` with the given weights.
pub fn weighted_kernel(per_p: &[f64], weighting: &Weighting) -> f64 {
    match *weighting {
        Weighting::QSpectrum { q } => per_p.get(q.wrapping_sub(1)).copied().unwrap_or(0.0),
        Weighting::Constant => per_p.iter().sum(),
        Weighting::Decay { lambda } => {
            let mut w = 1.0;
            per_p
                .iter()
                .map(|v| {
                    w *= lambda;
                    w * v
                })
                .sum()
        }
    }
}

/// Orders a pair so that `K(S, S')` and `K(S', S)` run the identical
/// floating-point computation.
pub(crate) fn canonical<'a>(
    s: &'a FeatureSequence,
    t: &'a FeatureSequence,
) -> (&'a FeatureSequence, &'a FeatureSequence) {
    let ord = s.len().cmp(&t.len()).then_with(|| {
        s.as_flat()
            .iter()
            .zip(t.as_flat())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    if ord == Ordering::Greater {
        (t, s)
    } else {
        (s, t)
    }
}

/// Weighted (unnormalized) kernel of a sequence with itself.
pub fn self_kernel(s: &FeatureSequence, config: &KernelConfig) -> Result<f64> {
    let per_p = spectrum_kernel_all_p(s, s, config.gamma)?;
    Ok(weighted_kernel(&per_p, &config.weighting))
}

pub(crate) fn q_out_of_range(weighting: &Weighting, min_len: usize) -> bool {
    matches!(*weighting, Weighting::QSpectrum { q } if q > min_len)
}

/// `raw / (sqrt(self_s) * sqrt(self_t))`, rejecting vanished self-kernels.
pub(crate) fn normalize(raw: f64, self_s: f64, self_t: f64) -> Result<f64> {
    for v in [self_s, self_t] {
        if v < f64::MIN_POSITIVE || !v.is_finite() {
            return Err(Error::SelfKernelUnderflow(v));
        }
    }
    Ok(raw / (self_s.sqrt() * self_t.sqrt()))
}

/// Spectrum kernel between two sequences under `config`, normalized by the
/// self-kernels unless `config.normalize` is off.
///
/// A q-spectrum length beyond the shorter sequence yields 0.
pub fn normalized_kernel(
    s: &FeatureSequence,
    t: &FeatureSequence,
    config: &KernelConfig,
) -> Result<f64> {
    config.validate()?;
    check_pair(s, t)?;
    if q_out_of_range(&config.weighting, s.len().min(t.len())) {
        return Ok(0.0);
    }
    let (a, b) = canonical(s, t);
    let raw = weighted_kernel(&spectrum_kernel_all_p(a, b, config.gamma)?, &config.weighting);
    if !config.normalize {
        return Ok(raw);
    }
    normalize(raw, self_kernel(a, config)?, self_kernel(b, config)?)
}

/// Gaussian kernel on the concatenation of all vectors of each sequence.
pub fn stacked_gaussian_kernel(s: &FeatureSequence, t: &FeatureSequence, gamma: f64) -> Result<f64> {
    check_pair(s, t)?;
    if s.len() != t.len() {
        return Err(Error::invalid(format!(
            "stacked kernel needs equal sequence lengths, got {} and {}",
            s.len(),
            t.len()
        )));
    }
    Ok((-gamma * squared_distance(s.as_flat(), t.as_flat())).exp())
}
