//! Soft-margin SVM over precomputed kernels with one-against-one multiclass
//! voting.

mod smo;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use smo::dual_objective;

use crate::datamodel::{write_atomic, GramMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-3;
const MODEL_FORMAT: &str = "hsk-svm-model";
const MODEL_VERSION: u32 = 1;

/// One binary machine. Support indices refer to the rows of the Gram it was
/// trained on (or, inside an [`SvmModel`], to the model's training samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    /// Class voted for by a positive decision value.
    pub positive: u16,
    pub negative: u16,
    pub c: f64,
    pub bias: f64,
    pub support: Vec<usize>,
    pub support_ids: Vec<String>,
    /// Dual coefficient times label for each support vector.
    pub alphas_signed: Vec<f64>,
    pub iterations: usize,
}

impl BinarySvm {
    /// `sum_k coef_k K(x, sv_k) + bias`, reading kernel values from `row`.
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.alphas_signed)
            .map(|(&s, a)| a * row[s])
            .sum::<f64>()
            + self.bias
    }
}

fn check_gram(gram: &GramMatrix, n: usize) -> Result<()> {
    if gram.rows() != gram.cols() {
        return Err(Error::invalid(format!(
            "training Gram must be square, got {}x{}",
            gram.rows(),
            gram.cols()
        )));
    }
    if gram.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: gram.rows(),
            found: n,
        });
    }
    if let Some(i) = gram.entries().iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite Gram entry at ({}, {})",
            i / n,
            i % n
        )));
    }
    Ok(())
}

fn check_params(c: f64, tol: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Trains one machine on a square Gram with labels `+1` / `-1`.
///
/// The returned machine reports `positive = 1`, `negative = 0`; [`train`]
/// fills in real class IDs.
pub fn train_binary(gram: &GramMatrix, labels: &[i8], c: f64, tol: f64) -> Result<BinarySvm> {
    check_params(c, tol)?;
    check_gram(gram, labels.len())?;
    if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::invalid(format!("binary labels must be +1 or -1, got {bad}")));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(Error::Training("binary training needs samples of both classes".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let sol = smo::solve(gram.entries(), &y, c, tol);
    if !sol.converged {
        log::warn!("SMO stopped after {} iterations without reaching tol {tol}", sol.iterations);
    }
    let mut support = Vec::new();
    let mut alphas_signed = Vec::new();
    for (i, (&a, &yi)) in sol.alpha.iter().zip(&y).enumerate() {
        if a > 0.0 {
            support.push(i);
            alphas_signed.push(a * yi);
        }
    }
    Ok(BinarySvm {
        positive: 1,
        negative: 0,
        c,
        bias: 0.0 - sol.rho,
        support_ids: support.iter().map(|&i| gram.row_ids()[i].clone()).collect(),
        support,
        alphas_signed,
        iterations: sol.iterations,
    })
}

/// Largest KKT violation of `machine` on its own training Gram, measured on
/// `y_i f(x_i)` against the margin for free and bounded coefficients.
pub fn kkt_residual(machine: &BinarySvm, gram: &GramMatrix, labels: &[i8]) -> f64 {
    let mut alpha = vec![0.0; labels.len()];
    for (&s, &a) in machine.support.iter().zip(&machine.alphas_signed) {
        alpha[s] = a.abs();
    }
    let bound = machine.c;
    (0..labels.len())
        .map(|i| {
            let margin = f64::from(labels[i]) * machine.decision(gram.row(i));
            if alpha[i] <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alpha[i] >= bound {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<u16>,
    pub training_sample_ids: Vec<String>,
    /// One machine per class pair `(classes[a], classes[b])`, `a < b`, in
    /// lexicographic pair order.
    pub machines: Vec<BinarySvm>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: SvmModel,
}

/// One-against-one training: a binary machine per class pair, each on the
/// Gram rows of that pair's samples.
pub fn train(gram: &GramMatrix, labels: &[u16], c: f64, tol: f64) -> Result<SvmModel> {
    check_params(c, tol)?;
    check_gram(gram, labels.len())?;
    let mut classes: Vec<u16> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Training(format!(
            "one-against-one training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let pairs: Vec<(u16, u16)> = classes
        .iter()
        .enumerate()
        .flat_map(|(a, &ca)| classes[a + 1..].iter().map(move |&cb| (ca, cb)))
        .collect();
    let machines = pairs
        .par_iter()
        .map(|&(pos, neg)| {
            let idx: Vec<usize> = (0..labels.len())
                .filter(|&i| labels[i] == pos || labels[i] == neg)
                .collect();
            let y: Vec<i8> = idx.iter().map(|&i| if labels[i] == pos { 1 } else { -1 }).collect();
            let mut m = train_binary(&gram.select(&idx, &idx), &y, c, tol)?;
            m.positive = pos;
            m.negative = neg;
            m.support = m.support.iter().map(|&s| idx[s]).collect();
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmModel {
        classes,
        training_sample_ids: gram.row_ids().to_vec(),
        machines,
    })
}

impl SvmModel {
    fn check_columns(&self, test_gram: &GramMatrix) -> Result<()> {
        if test_gram.cols() != self.training_sample_ids.len() {
            return Err(Error::invalid(format!(
                "test Gram has {} columns but the model was trained on {} samples",
                test_gram.cols(),
                self.training_sample_ids.len()
            )));
        }
        if let Some(j) = (0..test_gram.cols())
            .find(|&j| test_gram.col_ids()[j] != self.training_sample_ids[j])
        {
            return Err(Error::invalid(format!(
                "test Gram column {j} is {:?}, expected training sample {:?}",
                test_gram.col_ids()[j],
                self.training_sample_ids[j]
            )));
        }
        Ok(())
    }

    /// Decision value of every machine for every test row.
    pub fn decision_values(&self, test_gram: &GramMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_columns(test_gram)?;
        Ok((0..test_gram.rows())
            .into_par_iter()
            .map(|i| self.machines.iter().map(|m| m.decision(test_gram.row(i))).collect())
            .collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::invalid(format!("cannot serialize model: {e}")))?;
        text.push('\n');
        write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported model format {} v{}", file.format, file.version),
            ));
        }
        Ok(file.model)
    }
}

/// One-against-one vote per test row; a positive decision votes for the
/// pair's first class, and vote ties go to the smallest class ID.
pub fn predict(model: &SvmModel, test_gram: &GramMatrix) -> Result<Vec<u16>> {
    let decisions = model.decision_values(test_gram)?;
    Ok(decisions
        .iter()
        .map(|dv| {
            let mut votes = vec![0usize; model.classes.len()];
            for (m, &d) in model.machines.iter().zip(dv) {
                let winner = if d > 0.0 { m.positive } else { m.negative };
                let slot = model.classes.binary_search(&winner).expect("machine class in model");
                votes[slot] += 1;
            }
            let mut best = 0;
            for (k, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = k;
                }
            }
            model.classes[best]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    /// Block-structured Gram: 1 on the diagonal, `within` inside a class,
    /// `across` between classes.
    fn block_gram(labels: &[u16], within: f64, across: f64) -> GramMatrix {
        let n = labels.len();
        let mut e = vec![across; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    e[i * n + j] = 1.0;
                } else if labels[i] == labels[j] {
                    e[i * n + j] = within;
                }
            }
        }
        GramMatrix::square(e, ids(n)).unwrap()
    }

    #[test]
    fn hand_two_sample_case() {
        let g = GramMatrix::square(vec![1.0, 0.0, 0.0, 1.0], ids(2)).unwrap();
        let m = train_binary(&g, &[1, -1], 10.0, DEFAULT_TOL).unwrap();
        assert_eq!(m.support, vec![0, 1]);
        assert!((m.alphas_signed[0] - 1.0).abs() < 1e-12);
        assert!((m.alphas_signed[1] + 1.0).abs() < 1e-12);
        assert!(m.bias.abs() < 1e-12);
        assert!((m.decision(g.row(0)) - 1.0).abs() < 1e-12);
        assert!(kkt_residual(&m, &g, &[1, -1]) <= DEFAULT_TOL);
    }

    #[test]
    fn binary_errors() {
        let g = GramMatrix::square(vec![1.0, 0.0, 0.0, 1.0], ids(2)).unwrap();
        assert!(matches!(train_binary(&g, &[1, 1], 1.0, 1e-3), Err(Error::Training(_))));
        assert!(train_binary(&g, &[1, -1], 0.0, 1e-3).is_err());
        assert!(train_binary(&g, &[1, 2], 1.0, 1e-3).is_err());
        let nan = GramMatrix::square(vec![1.0, f64::NAN, f64::NAN, 1.0], ids(2)).unwrap();
        assert!(train_binary(&nan, &[1, -1], 1.0, 1e-3).is_err());
    }

    #[test]
    fn separable_blocks_recover_labels() {
        let labels = [1, 1, 2, 2, 3, 3, 3];
        let g = block_gram(&labels, 0.9, 0.05);
        let model = train(&g, &labels, 10.0, DEFAULT_TOL).unwrap();
        assert_eq!(model.machines.len(), 3);
        assert_eq!(predict(&model, &g).unwrap(), labels.to_vec());
        let pairs: Vec<_> = model.machines.iter().map(|m| (m.positive, m.negative)).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 3)]);
        for m in &model.machines {
            let sum: f64 = m.alphas_signed.iter().sum();
            assert!(sum.abs() <= 1e-9 * m.c * labels.len() as f64);
            assert!(m.alphas_signed.iter().all(|a| a.abs() <= m.c));
            assert!(m.support.iter().all(|&s| s < labels.len()));
        }
    }

    #[test]
    fn two_class_model_is_single_machine() {
        let labels = [4, 4, 9];
        let g = block_gram(&labels, 0.5, 0.1);
        let model = train(&g, &labels, 1.0, DEFAULT_TOL).unwrap();
        let y = [1i8, 1, -1];
        let single = train_binary(&g, &y, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(model.machines.len(), 1);
        assert_eq!(model.machines[0].alphas_signed, single.alphas_signed);
        assert_eq!(model.machines[0].bias, single.bias);
        let d = model.machines[0].decision(g.row(2));
        assert_eq!(predict(&model, &g).unwrap()[2], if d > 0.0 { 4 } else { 9 });
    }

    #[test]
    fn class_count_and_vote_ties() {
        let labels: Vec<u16> = (1..=16).flat_map(|c| [c, c]).collect();
        let g = block_gram(&labels, 0.8, 0.0);
        let model = train(&g, &labels, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(model.machines.len(), 120);
        assert!(train(&block_gram(&[1, 1], 0.5, 0.0), &[1, 1], 1.0, 1e-3).is_err());

        // A test row with zero similarity to everything gets decision values
        // equal to each bias; with symmetric classes every machine has bias 0
        // and votes its negative class, so class 3 (two votes) wins.
        let labels = [1u16, 2, 3];
        let g = block_gram(&labels, 0.0, 0.0);
        let model = train(&g, &labels, 1.0, DEFAULT_TOL).unwrap();
        let test = GramMatrix::new(vec![0.0; 3], vec!["t".into()], ids(3)).unwrap();
        assert_eq!(predict(&model, &test).unwrap(), vec![3]);
    }

    #[test]
    fn predict_checks_columns() {
        let labels = [1, 2];
        let g = block_gram(&labels, 0.0, 0.0);
        let model = train(&g, &labels, 1.0, DEFAULT_TOL).unwrap();
        let short = GramMatrix::new(vec![0.0], vec!["t".into()], vec!["s0".into()]).unwrap();
        assert!(predict(&model, &short).is_err());
        let renamed = GramMatrix::new(vec![0.0, 0.0], vec!["t".into()], vec!["x".into(), "s1".into()])
            .unwrap();
        assert!(predict(&model, &renamed).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let labels = [1, 1, 2, 3];
        let g = block_gram(&labels, 0.7, 0.2);
        let model = train(&g, &labels, 2.0, DEFAULT_TOL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        assert_eq!(SvmModel::load(&path).unwrap(), model);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"format\": \"hsk-svm-model\""));
    }
}
