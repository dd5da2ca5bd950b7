//! Classical classifiers behind a single fit / predict / predict_score
//! contract.
//!
//! Seven kinds are supported: L2-regularised logistic regression, random
//! forest, gradient-boosted trees, k-nearest neighbours, a single CART tree,
//! an RBF-kernel SVM and extremely randomised trees. Trees, forests and kNN
//! are natively multi-class; logistic regression, SVM and boosting are
//! reduced one-vs-rest. Logistic regression and SVM standardise their inputs
//! with statistics from the training data only.

mod boost;
mod forest;
mod knn;
mod logistic;
mod matrix;
mod rng;
mod scaler;
mod svm;
mod tree;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boost::{BoostParams, Booster, RegressionTree};
pub use forest::{Forest, ForestParams};
pub use knn::{Knn, KnnParams};
pub use logistic::{logistic_gradient, logistic_objective, BinaryLogistic, LogisticParams};
pub use matrix::Matrix;
pub use rng::stream_rng;
pub use scaler::Standardizer;
pub use svm::{KernelSvm, SvmParams};
pub use tree::{gini, DecisionTree, MaxFeatures, Node, SplitRule, TreeParams};

/// Feature matrix plus integer class labels in `[0, n_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidDimensions(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::InvalidDimensions("dataset has no features".into()));
        }
        if n_classes == 0 {
            return Err(Error::InvalidArgument(
                "class count must be positive".into(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside [0, {n_classes})"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    fn require_trainable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::DegenerateData(format!("{} samples", self.len())));
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::DegenerateData(
                "fewer than two classes present".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Logistic,
    RandomForest,
    GradientBoost,
    Knn,
    DecisionTree,
    Svm,
    ExtraTrees,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Logistic,
        ModelKind::RandomForest,
        ModelKind::GradientBoost,
        ModelKind::Knn,
        ModelKind::DecisionTree,
        ModelKind::Svm,
        ModelKind::ExtraTrees,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoost => "gradient_boost",
            ModelKind::Knn => "knn",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::Svm => "svm",
            ModelKind::ExtraTrees => "extra_trees",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match norm.as_str() {
            "logistic" | "lr" | "logistic_regression" => ModelKind::Logistic,
            "random_forest" | "rf" => ModelKind::RandomForest,
            "gradient_boost" | "xgboost" | "xgb" | "gbdt" => ModelKind::GradientBoost,
            "knn" => ModelKind::Knn,
            "decision_tree" | "dt" | "tree" => ModelKind::DecisionTree,
            "svm" => ModelKind::Svm,
            "extra_trees" | "et" => ModelKind::ExtraTrees,
            _ => return Err(Error::UnknownModel(s.to_string())),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hyperparams {
    Logistic(LogisticParams),
    RandomForest(ForestParams),
    GradientBoost(BoostParams),
    Knn(KnnParams),
    DecisionTree(TreeParams),
    Svm(SvmParams),
    ExtraTrees(ForestParams),
}

impl Hyperparams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Logistic => Hyperparams::Logistic(LogisticParams::default()),
            ModelKind::RandomForest => Hyperparams::RandomForest(ForestParams::random_forest()),
            ModelKind::GradientBoost => Hyperparams::GradientBoost(BoostParams::default()),
            ModelKind::Knn => Hyperparams::Knn(KnnParams::default()),
            ModelKind::DecisionTree => Hyperparams::DecisionTree(TreeParams::default()),
            ModelKind::Svm => Hyperparams::Svm(SvmParams::default()),
            ModelKind::ExtraTrees => Hyperparams::ExtraTrees(ForestParams::extra_trees()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Logistic(_) => ModelKind::Logistic,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
            Hyperparams::GradientBoost(_) => ModelKind::GradientBoost,
            Hyperparams::Knn(_) => ModelKind::Knn,
            Hyperparams::DecisionTree(_) => ModelKind::DecisionTree,
            Hyperparams::Svm(_) => ModelKind::Svm,
            Hyperparams::ExtraTrees(_) => ModelKind::ExtraTrees,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparams::Logistic(p) => p.validate(),
            Hyperparams::RandomForest(p) | Hyperparams::ExtraTrees(p) => p.validate(),
            Hyperparams::GradientBoost(p) => p.validate(),
            Hyperparams::Knn(p) => p.validate(),
            Hyperparams::DecisionTree(p) => p.validate(),
            Hyperparams::Svm(p) => p.validate(),
        }
    }
}

/// What to train: hyperparameters plus the seed all randomness derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        ModelSpec {
            params: Hyperparams::default_for(kind),
            seed,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// A real-valued decision function trained for one class against the rest.
pub trait BinaryScorer {
    fn decision(&self, row: &[f64]) -> f64;
}

/// One binary scorer for two-class problems, one per class otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsRest<M> {
    pub n_classes: usize,
    pub models: Vec<M>,
}

impl<M: Send> OneVsRest<M> {
    fn fit(data: &Dataset, fit_one: impl Fn(&[f64], usize) -> Result<M> + Sync) -> Result<Self> {
        let targets: Vec<usize> = if data.n_classes == 2 {
            vec![1]
        } else {
            (0..data.n_classes).collect()
        };
        let models = targets
            .par_iter()
            .map(|&class| {
                let y: Vec<f64> = data
                    .labels
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { 0.0 })
                    .collect();
                fit_one(&y, class)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OneVsRest {
            n_classes: data.n_classes,
            models,
        })
    }
}

impl<M: BinaryScorer> OneVsRest<M> {
    fn decisions(&self, row: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.decision(row)).collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Turns one-vs-rest probabilities into a distribution over classes.
fn ovr_probabilities(n_classes: usize, probs: &[f64]) -> Vec<f64> {
    if n_classes == 2 {
        return vec![1.0 - probs[0], probs[0]];
    }
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter().map(|p| p / total).collect()
    } else {
        vec![1.0 / n_classes as f64; n_classes]
    }
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledOvr<M> {
    pub scaler: Standardizer,
    pub ovr: OneVsRest<M>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Logistic(ScaledOvr<BinaryLogistic>),
    RandomForest(Forest),
    GradientBoost(OneVsRest<Booster>),
    Knn(Knn),
    DecisionTree(DecisionTree),
    Svm(ScaledOvr<KernelSvm>),
    ExtraTrees(Forest),
}

/// Trains a model; deterministic for a given `(spec, data)`.
pub fn fit(spec: &ModelSpec, data: &Dataset) -> Result<TrainedModel> {
    spec.params.validate()?;
    data.require_trainable()?;
    let seed = spec.seed;
    let model = match &spec.params {
        Hyperparams::Logistic(p) => {
            let scaler = Standardizer::fit(&data.features);
            let x = scaler.transform(&data.features);
            let ovr = OneVsRest::fit(data, |y, _| BinaryLogistic::fit(&x, y, p))?;
            TrainedModel::Logistic(ScaledOvr { scaler, ovr })
        }
        Hyperparams::Svm(p) => {
            let scaler = Standardizer::fit(&data.features);
            let x = scaler.transform(&data.features);
            let ovr = OneVsRest::fit(data, |y, class| {
                KernelSvm::fit(&x, y, p, stream_rng(seed, class as u64))
            })?;
            TrainedModel::Svm(ScaledOvr { scaler, ovr })
        }
        Hyperparams::GradientBoost(p) => {
            let binned = boost::BinnedMatrix::new(&data.features, p.max_bins);
            TrainedModel::GradientBoost(OneVsRest::fit(data, |y, _| Booster::fit(&binned, y, p))?)
        }
        Hyperparams::RandomForest(p) | Hyperparams::ExtraTrees(p) => {
            let forest = Forest::fit(data, p, seed)?;
            if spec.kind() == ModelKind::RandomForest {
                TrainedModel::RandomForest(forest)
            } else {
                TrainedModel::ExtraTrees(forest)
            }
        }
        Hyperparams::DecisionTree(p) => {
            let all: Vec<usize> = (0..data.len()).collect();
            TrainedModel::DecisionTree(DecisionTree::fit(data, &all, p, &mut stream_rng(seed, 0))?)
        }
        Hyperparams::Knn(p) => TrainedModel::Knn(Knn::fit(data, p)?),
    };
    Ok(model)
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logistic(_) => ModelKind::Logistic,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
            TrainedModel::GradientBoost(_) => ModelKind::GradientBoost,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::DecisionTree(_) => ModelKind::DecisionTree,
            TrainedModel::Svm(_) => ModelKind::Svm,
            TrainedModel::ExtraTrees(_) => ModelKind::ExtraTrees,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.ovr.n_classes,
            TrainedModel::Svm(m) => m.ovr.n_classes,
            TrainedModel::GradientBoost(m) => m.n_classes,
            TrainedModel::RandomForest(f) | TrainedModel::ExtraTrees(f) => f.n_classes,
            TrainedModel::Knn(k) => k.n_classes,
            TrainedModel::DecisionTree(t) => t.n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.scaler.mean.len(),
            TrainedModel::Svm(m) => m.scaler.mean.len(),
            TrainedModel::GradientBoost(m) => m.models[0].n_features,
            TrainedModel::RandomForest(f) | TrainedModel::ExtraTrees(f) => f.n_features,
            TrainedModel::Knn(k) => k.train.cols(),
            TrainedModel::DecisionTree(t) => t.n_features,
        }
    }

    /// Training-set standardisation statistics, for models that use them.
    pub fn scaler(&self) -> Option<&Standardizer> {
        match self {
            TrainedModel::Logistic(m) => Some(&m.scaler),
            TrainedModel::Svm(m) => Some(&m.scaler),
            _ => None,
        }
    }

    fn check_dims(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        Ok(())
    }

    fn score_row(&self, row: &[f64]) -> Vec<f64> {
        match self {
            TrainedModel::Logistic(m) => {
                let z = m.scaler.transform_row(row);
                let probs: Vec<f64> = m.ovr.decisions(&z).into_iter().map(sigmoid).collect();
                ovr_probabilities(m.ovr.n_classes, &probs)
            }
            TrainedModel::GradientBoost(m) => {
                let probs: Vec<f64> = m.decisions(row).into_iter().map(sigmoid).collect();
                ovr_probabilities(m.n_classes, &probs)
            }
            TrainedModel::Svm(m) => {
                let z = m.scaler.transform_row(row);
                let margins = m.ovr.decisions(&z);
                if m.ovr.n_classes == 2 {
                    vec![-margins[0], margins[0]]
                } else {
                    margins
                }
            }
            TrainedModel::RandomForest(f) | TrainedModel::ExtraTrees(f) => f.vote_fractions(row),
            TrainedModel::Knn(k) => k.vote_fractions(row),
            TrainedModel::DecisionTree(t) => t.leaf_distribution(row).to_vec(),
        }
    }

    fn label_from_scores(&self, scores: &[f64]) -> usize {
        match self {
            // binary logistic follows the p >= 0.5 rule
            TrainedModel::Logistic(m) if m.ovr.n_classes == 2 => usize::from(scores[1] >= 0.5),
            _ => argmax(scores),
        }
    }

    /// Per-class scores, one row per input row. Probabilistic models return
    /// rows summing to one; the SVM returns signed one-vs-rest margins.
    pub fn predict_score(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dims(x)?;
        let k = self.n_classes();
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .into_par_iter()
            .map(|i| self.score_row(x.row(i)))
            .collect();
        Matrix::new(x.rows(), k, rows.into_iter().flatten().collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let scores = self.predict_score(x)?;
        Ok((0..scores.rows())
            .map(|i| self.label_from_scores(scores.row(i)))
            .collect())
    }

    /// Writes the model as versioned JSON.
    pub fn save<W: Write>(&self, writer: W) -> Result<()> {
        let envelope = Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_writer(writer, &envelope).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let envelope: Envelope =
            serde_json::from_reader(reader).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if envelope.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format tag {:?}",
                envelope.format
            )));
        }
        if envelope.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {}",
                envelope.version
            )));
        }
        Ok(envelope.model)
    }
}

const MODEL_FORMAT: &str = "topohog-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedModel,
}
