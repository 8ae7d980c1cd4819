//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use hsk::datamodel::{FeatureSequence, HyperCube};
use hsk::hierarchy::Hierarchy;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sequence(rng: &mut impl Rng, len: usize, dim: usize) -> FeatureSequence {
    FeatureSequence::new(
        (0..len)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Smallest eigenvalue of a symmetric row-major `n x n` matrix.
pub fn min_eigenvalue(entries: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, entries);
    m.symmetric_eigen().eigenvalues.min()
}

/// Optimal value of `max e'a - 1/2 a'Qa, 0 <= a <= C, y'a = 0` found by trying
/// every assignment of coefficients to {lower bound, upper bound, free} and
/// solving the equality-constrained stationarity system on the free set.
pub fn svm_dual_oracle(kernel: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q(i, j);
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let f = free.len();
            let mut m = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    m[(r, s)] = q(i, j);
                }
                m[(r, f)] = y[i];
                m[(f, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] != 2).map(|j| q(i, j) * a[j]).sum::<f64>();
            }
            rhs[f] = -(0..n).filter(|&j| state[j] != 2).map(|j| y[j] * a[j]).sum::<f64>();
            let Ok(sol) = m.clone().svd(true, true).solve(&rhs, 1e-12) else {
                continue;
            };
            if (&m * &sol - &rhs).amax() > 1e-9 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
        }
        let feasible = a.iter().all(|&v| (-1e-9..=c + 1e-9).contains(&v))
            && a.iter().zip(y).map(|(v, yi)| v * yi).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(objective(&a));
        }
    }
    best
}

/// Gaussian Gram of random 2-D points with balanced random labels.
pub fn random_binary_problem(rng: &mut impl Rng, n: usize) -> (Vec<f64>, Vec<i8>) {
    let points: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let mut labels: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let gamma = rng.random_range(0.5..3.0);
    let kernel = points
        .iter()
        .flat_map(|p| {
            points.iter().map(move |q| {
                let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                (-gamma * d).exp()
            })
        })
        .collect();
    (kernel, labels)
}

/// Mean spectrum of the region holding `(row, col)` at `level`, by scanning
/// every pixel.
pub fn region_mean(h: &Hierarchy, cube: &HyperCube, level: usize, row: usize, col: usize) -> Vec<f64> {
    let ids = h.level(level);
    let target = ids[row * cube.cols() + col];
    let mut sum = vec![0.0; cube.bands()];
    let mut count = 0.0;
    for (p, _) in ids.iter().enumerate().filter(|(_, &id)| id == target) {
        for (s, v) in sum.iter_mut().zip(cube.spectrum(p / cube.cols(), p % cube.cols()).unwrap()) {
            *s += v;
        }
        count += 1.0;
    }
    sum.into_iter().map(|s| s / count).collect()
}
