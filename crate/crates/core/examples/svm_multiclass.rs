//! One-against-one SVM on a precomputed kernel: three clusters on a line.

use hsk::datamodel::GramMatrix;
use hsk::svm::{kkt_residual, predict, train, train_binary, DEFAULT_TOL};

fn gaussian(a: f64, b: f64) -> f64 {
    (-(a - b) * (a - b)).exp()
}

fn main() -> hsk::Result<()> {
    let train_x = [0.0, 0.2, 0.4, 3.0, 3.1, 3.3, 6.0, 6.2, 6.5];
    let train_y = [1u16, 1, 1, 2, 2, 2, 3, 3, 3];
    let ids: Vec<String> = (0..train_x.len()).map(|i| format!("s{i}")).collect();
    let k: Vec<f64> = train_x
        .iter()
        .flat_map(|&a| train_x.iter().map(move |&b| gaussian(a, b)))
        .collect();
    let k = GramMatrix::square(k, ids.clone())?;
    let model = train(&k, &train_y, 10.0, DEFAULT_TOL)?;
    for m in &model.machines {
        println!(
            "{} vs {}: support vectors {:?}, bias {:.4}",
            m.positive, m.negative, m.support_ids, m.bias
        );
    }

    // a single binary machine on classes 1 and 2
    let pair: Vec<usize> = (0..6).collect();
    let signs: Vec<i8> = pair.iter().map(|&i| if train_y[i] == 1 { 1 } else { -1 }).collect();
    let sub = k.select(&pair, &pair);
    let binary = train_binary(&sub, &signs, 10.0, DEFAULT_TOL)?;
    println!(
        "binary machine: {} iterations, KKT residual {:.2e}",
        binary.iterations,
        kkt_residual(&binary, &sub, &signs)
    );

    let test_x = [0.1, 2.8, 5.9, 4.6];
    let entries: Vec<f64> = test_x
        .iter()
        .flat_map(|&a| train_x.iter().map(move |&b| gaussian(a, b)))
        .collect();
    let test_ids = (0..test_x.len()).map(|i| format!("t{i}")).collect();
    let predicted = predict(&model, &GramMatrix::new(entries, test_ids, ids)?)?;
    println!("predictions for {test_x:?}: {predicted:?}");
    Ok(())
}
