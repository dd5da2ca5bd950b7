//! Fit every classifier on a small three-class problem and compare
//! predictions on held-out points.
//!
//! cargo run --release --example classifiers

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topohog::ml::{fit, Dataset, Matrix, ModelKind, ModelSpec};

fn blobs(n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let centres = [[0.0, 0.0], [3.0, 0.5], [1.0, 3.0]];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        rows.push(vec![
            centres[c][0] + rng.gen_range(-1.0..1.0),
            centres[c][1] + rng.gen_range(-1.0..1.0),
        ]);
        labels.push(c);
    }
    Dataset::new(Matrix::from_rows(&rows).expect("rectangular"), labels, 3).expect("valid labels")
}

fn main() -> topohog::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let train = blobs(150, &mut rng);
    let test = blobs(60, &mut rng);
    for kind in ModelKind::ALL {
        let model = fit(&ModelSpec::new(kind, 42), &train)?;
        let predicted = model.predict(&test.features)?;
        let correct = predicted
            .iter()
            .zip(&test.labels)
            .filter(|(p, t)| p == t)
            .count();
        let scores = model.predict_score(&test.features)?;
        println!(
            "{:<15} held-out accuracy {:>5.1}%  first scores {:?}",
            kind.name(),
            100.0 * correct as f64 / test.len() as f64,
            scores
                .row(0)
                .iter()
                .map(|s| format!("{s:.2}"))
                .collect::<Vec<_>>()
        );
    }

    let model = fit(&ModelSpec::new(ModelKind::GradientBoost, 42), &train)?;
    let mut json = Vec::new();
    model.save(&mut json)?;
    println!("saved gradient_boost model: {} bytes of JSON", json.len());
    Ok(())
}
