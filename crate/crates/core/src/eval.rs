//! Stratified k-fold cross-validation and the metric tables it produces.
//!
//! Binary reports use the positive class (label 1) for precision, recall
//! and F1 and add ROC AUC. Multi-class reports use support-weighted
//! one-vs-rest averages, which makes recall equal to accuracy.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::{fit, Dataset, Matrix, ModelSpec};

/// Fold membership for every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_count: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// `counts[fold][class]`.
    pub fn class_counts(&self, labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; n_classes]; self.fold_count];
        for (&f, &l) in self.assignments.iter().zip(labels) {
            counts[f][l] += 1;
        }
        counts
    }
}

/// Shuffles each class with the seed, then deals all samples round-robin
/// (class by class) into `k` folds. Per-class and total fold sizes differ
/// by at most one.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![vec![]; n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = crate::ml::stream_rng(seed, u64::MAX);
    let mut assignments = vec![0; labels.len()];
    let mut position = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldSplit {
        fold_count: k,
        assignments,
        seed,
    })
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidDimensions(
                "confusion matrix must be square".into(),
            ));
        }
        Ok(ConfusionMatrix {
            n_classes: k,
            counts: rows.concat(),
        })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], n_classes: usize) -> Self {
        let mut cm = ConfusionMatrix::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.counts[t * n_classes + p] += 1;
        }
        cm
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    fn row_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(c, p)).sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|t| self.get(t, c)).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(a, b)| *a += b);
    }
}

/// Classification metrics in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn class_prf(cm: &ConfusionMatrix, c: usize) -> (f64, f64, f64) {
    let tp = cm.get(c, c);
    let p = ratio(tp, cm.col_sum(c));
    let r = ratio(tp, cm.row_sum(c));
    (p, r, f1_of(p, r))
}

fn require_nonempty(cm: &ConfusionMatrix) -> Result<()> {
    if cm.total() == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    Ok(())
}

/// Precision, recall and F1 of one class; undefined ratios count as zero.
pub fn positive_class_metrics(cm: &ConfusionMatrix, positive: usize) -> Result<Metrics> {
    require_nonempty(cm)?;
    let (p, r, f) = class_prf(cm, positive);
    Ok(Metrics {
        accuracy: 100.0 * ratio(cm.trace(), cm.total()),
        precision: 100.0 * p,
        recall: 100.0 * r,
        f1: 100.0 * f,
    })
}

/// Support-weighted one-vs-rest averages.
pub fn weighted_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    require_nonempty(cm)?;
    let total = cm.total() as f64;
    let (mut p, mut f) = (0.0, 0.0);
    for c in 0..cm.n_classes {
        let w = cm.row_sum(c) as f64 / total;
        let (pc, _, fc) = class_prf(cm, c);
        p += w * pc;
        f += w * fc;
    }
    // support weights cancel: Σ (n_c / N)(tp_c / n_c) = trace / N
    let r = ratio(cm.trace(), cm.total());
    Ok(Metrics {
        accuracy: 100.0 * ratio(cm.trace(), cm.total()),
        precision: 100.0 * p,
        recall: 100.0 * r,
        f1: 100.0 * f,
    })
}

/// Positive-class metrics for two classes, weighted averages otherwise.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.n_classes == 2 {
        positive_class_metrics(cm, 1)
    } else {
        weighted_metrics(cm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Samples scoring `>= threshold` are called positive.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Mann–Whitney AUC (ties count one half) and the ROC curve swept over
/// distinct score thresholds, from (0, 0) to (1, 1).
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<(f64, Vec<RocPoint>)> {
    if scores.len() != positive.len() {
        return Err(Error::InvalidDimensions(format!(
            "{} scores for {} labels",
            scores.len(),
            positive.len()
        )));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidArgument("ROC needs both classes".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // average ranks (1-based) over tie groups
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + end) as f64 / 2.0 + 1.0;
        let pos_in_group = order[start..=end].iter().filter(|&&i| positive[i]).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        start = end + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    let auc = (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = order.len();
    while i > 0 {
        let s = scores[order[i - 1]];
        while i > 0 && scores[order[i - 1]] == s {
            if positive[order[i - 1]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i -= 1;
        }
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
        });
    }
    Ok((auc, points))
}

/// Something that can be trained on one fold and scored on another.
pub trait Learner: Sync {
    fn name(&self) -> String;
    /// Predicted labels and per-class scores for `test`.
    fn fit_and_score(&self, train: &Dataset, test: &Matrix) -> Result<(Vec<usize>, Matrix)>;
}

impl Learner for ModelSpec {
    fn name(&self) -> String {
        self.kind().to_string()
    }

    fn fit_and_score(&self, train: &Dataset, test: &Matrix) -> Result<(Vec<usize>, Matrix)> {
        let model = fit(self, train)?;
        Ok((model.predict(test)?, model.predict_score(test)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: Metrics,
    /// Percent; binary tasks only.
    pub auc: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub roc: Vec<RocPoint>,
}

/// Mean and sample standard deviation (n − 1) over fold values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub n_classes: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub accuracy: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
    pub auc: Option<Summary>,
}

impl MetricsReport {
    fn assemble(model: String, n_classes: usize, seed: u64, folds: Vec<FoldResult>) -> Self {
        let pick = |f: fn(&FoldResult) -> f64| -> Summary {
            Summary::of(&folds.iter().map(f).collect::<Vec<_>>())
        };
        let auc = if folds.iter().all(|f| f.auc.is_some()) && !folds.is_empty() {
            Some(pick(|f| f.auc.unwrap_or_default()))
        } else {
            None
        };
        MetricsReport {
            accuracy: pick(|f| f.metrics.accuracy),
            precision: pick(|f| f.metrics.precision),
            recall: pick(|f| f.metrics.recall),
            f1: pick(|f| f.metrics.f1),
            auc,
            model,
            n_classes,
            seed,
            folds,
        }
    }

    /// Sum of the per-fold confusion matrices.
    pub fn pooled_confusion(&self) -> ConfusionMatrix {
        let mut total = ConfusionMatrix::new(self.n_classes);
        for f in &self.folds {
            total.add(&f.confusion);
        }
        total
    }
}

/// Runs every fold (in parallel) and aggregates the results.
pub fn cross_validate_with<L: Learner + ?Sized>(
    learner: &L,
    data: &Dataset,
    folds: &FoldSplit,
) -> Result<MetricsReport> {
    if folds.assignments.len() != data.len() {
        return Err(Error::InvalidDimensions(format!(
            "fold split covers {} samples, dataset has {}",
            folds.assignments.len(),
            data.len()
        )));
    }
    let k = data.n_classes;
    let results = (0..folds.fold_count)
        .into_par_iter()
        .map(|fold| -> Result<FoldResult> {
            let train = data.subset(&folds.train_indices(fold));
            let test = data.subset(&folds.test_indices(fold));
            let (predicted, scores) = learner.fit_and_score(&train, &test.features)?;
            let confusion = ConfusionMatrix::from_predictions(&test.labels, &predicted, k);
            let (auc, roc) = if k == 2 {
                let positive: Vec<bool> = test.labels.iter().map(|&l| l == 1).collect();
                let column: Vec<f64> = (0..scores.rows()).map(|i| scores.get(i, 1)).collect();
                let (auc, roc) = roc_auc(&column, &positive)?;
                (Some(100.0 * auc), roc)
            } else {
                (None, vec![])
            };
            Ok(FoldResult {
                fold,
                metrics: metrics(&confusion)?,
                auc,
                confusion,
                roc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport::assemble(
        learner.name(),
        k,
        folds.seed,
        results,
    ))
}

pub fn cross_validate(
    spec: &ModelSpec,
    data: &Dataset,
    folds: &FoldSplit,
) -> Result<MetricsReport> {
    cross_validate_with(spec, data, folds)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per model: mean and standard deviation of each metric.
pub fn write_metrics_csv<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model",
        "acc_mean",
        "acc_std",
        "prec_mean",
        "prec_std",
        "rec_mean",
        "rec_std",
        "f1_mean",
        "f1_std",
        "auc_mean",
        "auc_std",
    ])?;
    for r in reports {
        w.write_record([
            r.model.clone(),
            r.accuracy.mean.to_string(),
            r.accuracy.std.to_string(),
            r.precision.mean.to_string(),
            r.precision.std.to_string(),
            r.recall.mean.to_string(),
            r.recall.std.to_string(),
            r.f1.mean.to_string(),
            r.f1.std.to_string(),
            opt(r.auc.map(|a| a.mean)),
            opt(r.auc.map(|a| a.std)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fold_metrics_csv<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model",
        "fold",
        "accuracy",
        "precision",
        "recall",
        "f1",
        "auc",
    ])?;
    for r in reports {
        for f in &r.folds {
            w.write_record([
                r.model.clone(),
                f.fold.to_string(),
                f.metrics.accuracy.to_string(),
                f.metrics.precision.to_string(),
                f.metrics.recall.to_string(),
                f.metrics.f1.to_string(),
                opt(f.auc),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (model, fold, true class, predicted class).
pub fn write_confusion_csv<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "fold", "true", "predicted", "count"])?;
    for r in reports {
        for f in &r.folds {
            let k = f.confusion.n_classes();
            for t in 0..k {
                for p in 0..k {
                    w.write_record([
                        r.model.clone(),
                        f.fold.to_string(),
                        t.to_string(),
                        p.to_string(),
                        f.confusion.get(t, p).to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_roc_csv<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "fold", "threshold", "fpr", "tpr"])?;
    for r in reports {
        for f in &r.folds {
            for pt in &f.roc {
                w.write_record([
                    r.model.clone(),
                    f.fold.to_string(),
                    pt.threshold.to_string(),
                    pt.fpr.to_string(),
                    pt.tpr.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Model × metric means, the data behind a radar chart.
pub fn write_radar_csv<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let with_auc = reports.iter().all(|r| r.auc.is_some()) && !reports.is_empty();
    let mut header = vec!["model", "accuracy", "precision", "recall", "f1"];
    if with_auc {
        header.push("auc");
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.model.clone(),
            r.accuracy.mean.to_string(),
            r.precision.mean.to_string(),
            r.recall.mean.to_string(),
            r.f1.mean.to_string(),
        ];
        if with_auc {
            row.push(opt(r.auc.map(|a| a.mean)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text results table, one row per model, `mean ± std` cells.
pub fn format_summary(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    let with_auc = reports.iter().any(|r| r.auc.is_some());
    out.push_str(&format!(
        "{:<16}{:>16}{:>16}{:>16}{:>16}",
        "Model", "Avg Acc", "Avg Prec", "Avg Rec", "Avg F1-score"
    ));
    if with_auc {
        out.push_str(&format!("{:>10}", "Avg AUC"));
    }
    out.push('\n');
    let cell = |s: &Summary| format!("{:.2} ± {:.2}", s.mean, s.std);
    for r in reports {
        out.push_str(&format!(
            "{:<16}{:>16}{:>16}{:>16}{:>16}",
            r.model,
            cell(&r.accuracy),
            cell(&r.precision),
            cell(&r.recall),
            cell(&r.f1)
        ));
        if let Some(a) = r.auc {
            out.push_str(&format!("{:>10.1}", a.mean.round()));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_reject_small_class() {
        let labels = vec![0, 0, 0, 1, 1];
        assert!(matches!(
            stratified_folds(&labels, 3, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                count: 2,
                folds: 3
            })
        ));
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn one_per_fold() {
        let split = stratified_folds(&[0; 10], 10, 5).unwrap();
        assert_eq!(split.fold_sizes(), vec![1; 10]);
    }

    #[test]
    fn hand_metrics() {
        let cm = ConfusionMatrix::from_rows(&[vec![40, 10], vec![5, 45]]).unwrap();
        let m = metrics(&cm).unwrap();
        assert!((m.accuracy - 85.0).abs() < 1e-12);
        assert!((m.precision - 100.0 * 45.0 / 55.0).abs() < 1e-12);
        assert!((m.recall - 90.0).abs() < 1e-12);
        let (p, r) = (45.0 / 55.0, 0.9);
        assert!((m.f1 - 100.0 * 2.0 * p * r / (p + r)).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_perfect() {
        for cm in [
            ConfusionMatrix::from_rows(&[vec![50, 0], vec![0, 50]]).unwrap(),
            ConfusionMatrix::from_rows(&[vec![3, 0, 0], vec![0, 7, 0], vec![0, 0, 1]]).unwrap(),
        ] {
            let m = metrics(&cm).unwrap();
            assert_eq!(
                (m.accuracy, m.precision, m.recall, m.f1),
                (100.0, 100.0, 100.0, 100.0)
            );
        }
    }

    #[test]
    fn empty_matrix_is_error() {
        assert!(metrics(&ConfusionMatrix::new(3)).is_err());
    }

    #[test]
    fn auc_extremes() {
        let labels = [false, false, true, true];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap().0, 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels).unwrap().0, 0.5);
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap().0, 0.0);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn roc_endpoints() {
        let (_, pts) = roc_auc(&[0.3, 0.3, 0.9, 0.1], &[false, true, true, false]).unwrap();
        assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn sample_standard_deviation() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[50.0; 10]).std, 0.0);
    }
}
