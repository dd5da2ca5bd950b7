//! Stratified 10-fold cross-validation with binary and five-class reports.
//!
//! cargo run --release --example cross_validation

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topohog::eval::{cross_validate, format_summary, stratified_folds};
use topohog::ml::{Dataset, Matrix, ModelKind, ModelSpec};

/// Overlapping ordinal classes, loosely like severity grades.
fn graded(n: usize, classes: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let grade = rng.gen_range(0..classes);
        let row: Vec<f64> = (0..6)
            .map(|j| grade as f64 * (1.0 + j as f64 * 0.2) + rng.gen_range(-1.5..1.5))
            .collect();
        rows.push(row);
        labels.push(grade);
    }
    Dataset::new(
        Matrix::from_rows(&rows).expect("rectangular"),
        labels,
        classes,
    )
    .expect("valid labels")
}

fn main() -> topohog::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let models = [
        ModelKind::Logistic,
        ModelKind::Knn,
        ModelKind::RandomForest,
        ModelKind::GradientBoost,
    ];
    for classes in [2, 5] {
        let data = graded(400, classes, &mut rng);
        let folds = stratified_folds(&data.labels, 10, 0)?;
        println!("{classes} classes, fold sizes {:?}", folds.fold_sizes());
        let reports = models
            .iter()
            .map(|&k| cross_validate(&ModelSpec::new(k, 0), &data, &folds))
            .collect::<topohog::Result<Vec<_>>>()?;
        println!("{}", format_summary(&reports));
        let cm = reports[0].pooled_confusion();
        println!("logistic pooled confusion matrix:");
        for t in 0..cm.n_classes() {
            println!(
                "  {:?}",
                (0..cm.n_classes())
                    .map(|p| cm.get(t, p))
                    .collect::<Vec<_>>()
            );
        }
        println!();
    }
    Ok(())
}
