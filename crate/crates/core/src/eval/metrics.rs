use crate::error::{Error, Result};

/// Agreement between predicted and reference labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Sorted union of the labels seen in either input.
    pub classes: Vec<u16>,
    /// `confusion[t][p]`: samples of true class `classes[t]` predicted as
    /// `classes[p]`.
    pub confusion: Vec<Vec<usize>>,
    pub overall_accuracy: f64,
    /// Mean recall over the classes that occur in the reference labels.
    pub average_accuracy: f64,
    pub kappa: f64,
    /// Recall per class; `None` for classes absent from the reference.
    pub per_class_accuracy: Vec<Option<f64>>,
}

pub fn compute_metrics(predicted: &[u16], truth: &[u16]) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("cannot compute metrics on empty input"));
    }
    let mut classes: Vec<u16> = truth.iter().chain(predicted).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    let slot = |c: u16| classes.binary_search(&c).expect("label collected above");
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[slot(t)][slot(p)] += 1;
    }

    let total = truth.len() as f64;
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let overall_accuracy = correct as f64 / total;

    let row_sums: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..k).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
    let per_class_accuracy: Vec<Option<f64>> = (0..k)
        .map(|i| (row_sums[i] > 0).then(|| confusion[i][i] as f64 / row_sums[i] as f64))
        .collect();
    let recalls: Vec<f64> = per_class_accuracy.iter().flatten().copied().collect();
    let average_accuracy = recalls.iter().sum::<f64>() / recalls.len() as f64;

    let chance: f64 = row_sums
        .iter()
        .zip(&col_sums)
        .map(|(&r, &c)| (r as f64 / total) * (c as f64 / total))
        .sum();
    let kappa = if 1.0 - chance > 0.0 {
        (overall_accuracy - chance) / (1.0 - chance)
    } else if overall_accuracy == 1.0 {
        1.0
    } else {
        0.0
    };

    Ok(Metrics {
        classes,
        confusion,
        overall_accuracy,
        average_accuracy,
        kappa,
        per_class_accuracy,
    })
}
