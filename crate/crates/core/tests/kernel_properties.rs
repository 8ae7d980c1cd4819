mod common;

use common::{min_eigenvalue, random_sequence, relative_error, rng};
use hsk::datamodel::FeatureSequence;
use hsk::kernel::oracle::{brute_force_spectrum, enumerate_subsequences};
use hsk::kernel::{
    gram, normalized_kernel, spectrum_kernel_all_p, spectrum_kernel_all_p_with, stacked_gaussian_kernel,
    AtomicKernel, Gaussian, KernelConfig, Weighting,
};
use proptest::prelude::*;
use rand::Rng;

fn sequence_strategy(dim: usize) -> impl Strategy<Value = FeatureSequence> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), 1..7)
        .prop_map(|v| FeatureSequence::new(v).unwrap())
}

fn pair_strategy() -> impl Strategy<Value = (FeatureSequence, FeatureSequence)> {
    (1usize..4).prop_flat_map(|d| (sequence_strategy(d), sequence_strategy(d)))
}

proptest! {
    #[test]
    fn dp_equals_enumeration((s, t) in pair_strategy(), gamma in 0.05f64..5.0) {
        let dp = spectrum_kernel_all_p(&s, &t, gamma).unwrap();
        let bf = brute_force_spectrum(&s, &t, gamma).unwrap();
        prop_assert_eq!(dp.len(), s.len().min(t.len()));
        for (a, b) in dp.iter().zip(&bf) {
            prop_assert!(relative_error(*a, *b) <= 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn swapped_arguments_give_identical_bits((s, t) in pair_strategy(), gamma in 0.05f64..5.0) {
        for w in [Weighting::Constant, Weighting::Decay { lambda: 0.3 }, Weighting::QSpectrum { q: 1 }] {
            let config = KernelConfig::new(gamma, w).unwrap();
            let a = normalized_kernel(&s, &t, &config).unwrap();
            let b = normalized_kernel(&t, &s, &config).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn stacked_is_longest_spectrum(len in 1usize..8, dim in 1usize..4, seed in any::<u64>(), gamma in 0.05f64..5.0) {
        let mut r = rng(seed);
        let s = random_sequence(&mut r, len, dim);
        let t = random_sequence(&mut r, len, dim);
        let per_p = spectrum_kernel_all_p(&s, &t, gamma).unwrap();
        let stacked = stacked_gaussian_kernel(&s, &t, gamma).unwrap();
        prop_assert!(relative_error(per_p[len - 1], stacked) <= 1e-12);
    }
}

#[test]
fn subsequence_counts() {
    for len in 1..=10 {
        let subs = enumerate_subsequences(len);
        assert_eq!(subs.len(), len * (len + 1) / 2);
        for p in 1..=len {
            assert_eq!(subs.iter().filter(|r| r.len() == p).count(), len - p + 1);
        }
    }
}

struct Counting {
    inner: Gaussian,
    calls: std::cell::Cell<usize>,
}

impl AtomicKernel for Counting {
    fn log_eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.calls.set(self.calls.get() + 1);
        self.inner.log_eval(x, y)
    }
}

#[test]
fn one_atomic_evaluation_per_node_pair() {
    let mut r = rng(11);
    for _ in 0..30 {
        let (a, b) = (r.random_range(1..15), r.random_range(1..15));
        let s = random_sequence(&mut r, a, 3);
        let t = random_sequence(&mut r, b, 3);
        let k = Counting { inner: Gaussian { gamma: 0.7 }, calls: 0.into() };
        spectrum_kernel_all_p_with(&s, &t, &k).unwrap();
        assert_eq!(k.calls.get(), a * b);
    }
}

#[test]
fn long_sequences_stay_finite() {
    // 60 levels of far-apart nodes: products underflow outside log space
    let s = FeatureSequence::new((0..60).map(|i| vec![i as f64]).collect()).unwrap();
    let t = FeatureSequence::new((0..60).map(|i| vec![i as f64 + 3.0]).collect()).unwrap();
    let config = KernelConfig::new(2.0, Weighting::Constant).unwrap();
    let k = normalized_kernel(&s, &t, &config).unwrap();
    assert!(k.is_finite() && (0.0..=1.0).contains(&k));
    assert_eq!(normalized_kernel(&s, &s, &config).unwrap(), 1.0);
}

#[test]
fn gram_is_positive_semidefinite_for_every_weighting() {
    let mut r = rng(5);
    let seqs: Vec<FeatureSequence> = (0..30)
        .map(|_| {
            let len = r.random_range(1..9);
            random_sequence(&mut r, len, 4)
        })
        .collect();
    for w in [
        Weighting::Constant,
        Weighting::QSpectrum { q: 1 },
        Weighting::Decay { lambda: 0.2 },
        Weighting::Decay { lambda: 0.9 },
    ] {
        for gamma in [0.1, 1.0, 10.0] {
            let k = gram(&seqs, None, &KernelConfig::new(gamma, w).unwrap()).unwrap();
            for i in 0..30 {
                assert!((k[i * 30 + i] - 1.0).abs() <= 1e-12);
                for j in 0..30 {
                    assert_eq!(k[i * 30 + j].to_bits(), k[j * 30 + i].to_bits());
                }
            }
            let min = min_eigenvalue(&k, 30);
            assert!(min >= -1e-8 * 30.0, "{w} gamma {gamma}: {min}");
        }
    }
}

#[test]
fn cross_gram_matches_pairwise_kernel() {
    let mut r = rng(8);
    let rows: Vec<_> = (0..5).map(|i| random_sequence(&mut r, 1 + i, 2)).collect();
    let cols: Vec<_> = (0..4).map(|i| random_sequence(&mut r, 4 - i, 2)).collect();
    let config = KernelConfig::new(0.5, Weighting::Decay { lambda: 0.5 }).unwrap();
    let k = gram(&rows, Some(&cols), &config).unwrap();
    for (i, s) in rows.iter().enumerate() {
        for (j, t) in cols.iter().enumerate() {
            assert!(relative_error(k[i * 4 + j], normalized_kernel(s, t, &config).unwrap()) < 1e-14);
        }
    }
}

#[test]
fn oversized_q_gives_zero() {
    let mut r = rng(2);
    let seqs: Vec<_> = (0..4).map(|_| random_sequence(&mut r, 3, 2)).collect();
    let k = gram(&seqs, None, &KernelConfig::new(1.0, Weighting::QSpectrum { q: 9 }).unwrap()).unwrap();
    assert!(k.iter().all(|&v| v == 0.0));
}
