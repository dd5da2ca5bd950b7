//! Gini classification trees, shared by the single-tree model, random
//! forests and extremely randomised trees.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, Dataset};
use crate::error::{Error, Result};

/// How many features a node examines before settling on a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => ((n_features as f64).sqrt() as usize).max(1),
            MaxFeatures::Count(k) => k.clamp(1, n_features),
        }
    }
}

/// Best threshold over sorted values, or a uniformly random cut-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitRule {
    Best,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub rule: SplitRule,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            rule: SplitRule::Best,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 || self.max_features == MaxFeatures::Count(0) {
            return Err(Error::InvalidHyperparameter(format!(
                "tree needs min_samples_leaf >= 1 and max_features >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        distribution: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

/// Gini impurity `1 − Σ p²` of a class histogram.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

// Σ c²/n; larger means purer. Weighted child impurity is n − this.
fn purity(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n as f64
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl DecisionTree {
    /// Grows a tree on `indices` (repeats allowed, as in bootstrap samples).
    pub fn fit<R: Rng>(
        data: &Dataset,
        indices: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        if indices.is_empty() {
            return Err(Error::DegenerateData("no samples for tree".into()));
        }
        let mut tree = DecisionTree {
            n_classes: data.n_classes,
            n_features: data.n_features(),
            nodes: vec![],
        };
        let mut features: Vec<usize> = (0..tree.n_features).collect();
        let mut stack = vec![(tree.push_placeholder(), indices.to_vec(), 0usize)];
        while let Some((id, samples, depth)) = stack.pop() {
            let counts = tree.counts(data, &samples);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_ok = params.max_depth.is_none_or(|m| depth < m);
            let split = if !pure && depth_ok && samples.len() >= 2 * params.min_samples_leaf {
                tree.find_split(data, &samples, params, &mut features, rng)
            } else {
                None
            };
            match split {
                None => {
                    let n = samples.len() as f64;
                    tree.nodes[id] = Node::Leaf {
                        distribution: counts.iter().map(|&c| c as f64 / n).collect(),
                    };
                }
                Some(c) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = samples
                        .iter()
                        .partition(|&&i| data.features.get(i, c.feature) <= c.threshold);
                    let (left, right) = (tree.push_placeholder(), tree.push_placeholder());
                    tree.nodes[id] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Ok(tree)
    }

    fn push_placeholder(&mut self) -> usize {
        self.nodes.push(Node::Leaf {
            distribution: vec![],
        });
        self.nodes.len() - 1
    }

    fn counts(&self, data: &Dataset, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &i in samples {
            counts[data.labels[i]] += 1;
        }
        counts
    }

    fn find_split<R: Rng>(
        &self,
        data: &Dataset,
        samples: &[usize],
        params: &TreeParams,
        features: &mut [usize],
        rng: &mut R,
    ) -> Option<Candidate> {
        let wanted = params.max_features.resolve(self.n_features);
        if wanted < self.n_features {
            features.shuffle(rng);
        } else {
            features.sort_unstable();
        }
        let mut best: Option<Candidate> = None;
        let mut values: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        for (examined, &f) in features.iter().enumerate() {
            // keep looking past the quota until some valid split exists
            if examined >= wanted && best.is_some() {
                break;
            }
            values.clear();
            values.extend(
                samples
                    .iter()
                    .map(|&i| (data.features.get(i, f), data.labels[i])),
            );
            let cand = match params.rule {
                SplitRule::Best => self.best_threshold(f, &mut values, params.min_samples_leaf),
                SplitRule::Random => {
                    self.random_threshold(f, &values, params.min_samples_leaf, rng)
                }
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.score > b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(
        &self,
        feature: usize,
        values: &mut [(f64, usize)],
        min_leaf: usize,
    ) -> Option<Candidate> {
        values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = values.len();
        let mut right = vec![0usize; self.n_classes];
        for &(_, l) in values.iter() {
            right[l] += 1;
        }
        let mut left = vec![0usize; self.n_classes];
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            let l = values[i].1;
            left[l] += 1;
            right[l] -= 1;
            let (nl, nr) = (i + 1, n - i - 1);
            if values[i].0 >= values[i + 1].0 || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let score = purity(&left, nl) + purity(&right, nr);
            if best.as_ref().is_none_or(|b| score > b.score) {
                let mut threshold = 0.5 * (values[i].0 + values[i + 1].0);
                if threshold >= values[i + 1].0 {
                    threshold = values[i].0;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
        best
    }

    fn random_threshold<R: Rng>(
        &self,
        feature: usize,
        values: &[(f64, usize)],
        min_leaf: usize,
        rng: &mut R,
    ) -> Option<Candidate> {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| {
                (lo.min(v), hi.max(v))
            });
        if !(lo < hi) {
            return None;
        }
        let threshold = rng.gen_range(lo..hi);
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &(v, l) in values {
            if v <= threshold {
                left[l] += 1;
            } else {
                right[l] += 1;
            }
        }
        let (nl, nr) = (left.iter().sum::<usize>(), right.iter().sum::<usize>());
        if nl < min_leaf || nr < min_leaf {
            return None;
        }
        Some(Candidate {
            feature,
            threshold,
            score: purity(&left, nl) + purity(&right, nr),
        })
    }

    pub fn leaf_distribution(&self, row: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(self.leaf_distribution(row))
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}
