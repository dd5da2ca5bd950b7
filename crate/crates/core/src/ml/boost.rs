//! Second-order gradient boosting of regression trees under logistic loss.
//!
//! Each round fits a depth-limited tree to the gradients `g = p − y` and
//! hessians `h = p(1 − p)` of the current margins. A leaf with gradient sum
//! `G` and hessian sum `H` takes weight `−G/(H + λ)`, and a split is scored
//! by `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`. Split candidates come
//! from per-feature histograms over at most `max_bins` value ranges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigmoid, BinaryScorer, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum loss reduction per split (and per-leaf complexity cost).
    pub gamma: f64,
    pub min_child_weight: f64,
    pub max_bins: usize,
    /// Initial margin shared by every sample.
    pub base_score: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 100,
            max_depth: 6,
            learning_rate: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            max_bins: 256,
            base_score: 0.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_trees >= 1
            && self.learning_rate > 0.0
            && self.lambda >= 0.0
            && self.gamma >= 0.0
            && self.min_child_weight >= 0.0
            && (2..=256).contains(&self.max_bins);
        if !ok {
            return Err(Error::InvalidHyperparameter(format!(
                "boosting needs trees >= 1, eta > 0, lambda >= 0, gamma >= 0, 2 <= bins <= 256: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Features quantised once per training set; bin `b` of feature `f` holds
/// values in `(cuts[f][b-1], cuts[f][b]]`.
pub(crate) struct BinnedMatrix {
    rows: usize,
    cols: usize,
    bins: Vec<u8>,
    cuts: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    pub(crate) fn new(x: &Matrix, max_bins: usize) -> Self {
        let (rows, cols) = (x.rows(), x.cols());
        let cuts: Vec<Vec<f64>> = (0..cols)
            .into_par_iter()
            .map(|f| {
                let mut col: Vec<f64> = (0..rows).map(|i| x.get(i, f)).collect();
                col.sort_unstable_by(|a, b| a.total_cmp(b));
                feature_cuts(&col, max_bins)
            })
            .collect();
        let mut bins = vec![0u8; rows * cols];
        bins.par_chunks_mut(cols).enumerate().for_each(|(i, out)| {
            for (f, b) in out.iter_mut().enumerate() {
                *b = bin_of(&cuts[f], x.get(i, f)) as u8;
            }
        });
        BinnedMatrix {
            rows,
            cols,
            bins,
            cuts,
        }
    }

    fn bin(&self, i: usize, f: usize) -> usize {
        self.bins[i * self.cols + f] as usize
    }
}

fn bin_of(cuts: &[f64], v: f64) -> usize {
    cuts.partition_point(|&c| c < v)
}

/// Midpoints between consecutive distinct values, thinned to at most
/// `max_bins − 1` cuts by quantile when there are too many.
fn feature_cuts(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = sorted.to_vec();
    distinct.dedup();
    let midpoint = |a: f64, b: f64| {
        let m = 0.5 * (a + b);
        if m >= b {
            a
        } else {
            m
        }
    };
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut cuts = Vec::with_capacity(max_bins - 1);
    for j in 1..max_bins {
        let v = sorted[(j * n / max_bins).min(n - 1)];
        let next = distinct.partition_point(|&d| d <= v);
        if next < distinct.len() {
            let c = midpoint(v, distinct[next]);
            if cuts.last().is_none_or(|&last| c > last) {
                cuts.push(c);
            }
        }
    }
    cuts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegNode {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A regression tree whose leaves carry raw (unshrunk) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<RegNode>,
}

impl RegressionTree {
    pub fn value(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                RegNode::Leaf { weight } => return *weight,
                RegNode::Split {
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

    fn value_binned(&self, x: &BinnedMatrix, i: usize) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                RegNode::Leaf { weight } => return *weight,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let cut = &x.cuts[*feature];
                    // bin b holds values <= cuts[b], so the threshold cut index decides
                    let b = x.bin(i, *feature);
                    let t = cut.partition_point(|&c| c < *threshold);
                    id = if b <= t { *left } else { *right };
                }
            }
        }
    }
}

/// Leaf weight minimising the second-order objective.
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn leaf_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

struct SplitChoice {
    feature: usize,
    bin: usize,
    gain: f64,
}

/// Binary boosted ensemble producing a logit margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booster {
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl BinaryScorer for Booster {
    fn decision(&self, row: &[f64]) -> f64 {
        self.margin(row)
    }
}

impl Booster {
    pub(crate) fn fit(x: &BinnedMatrix, y: &[f64], params: &BoostParams) -> Result<Self> {
        params.validate()?;
        let n = x.rows;
        let mut margins = vec![params.base_score; n];
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..params.n_trees {
            for i in 0..n {
                let p = sigmoid(margins[i]);
                g[i] = p - y[i];
                h[i] = p * (1.0 - p);
            }
            let tree = grow(x, &g, &h, params);
            for (i, m) in margins.iter_mut().enumerate() {
                *m += params.learning_rate * tree.value_binned(x, i);
            }
            trees.push(tree);
        }
        Ok(Booster {
            n_features: x.cols,
            base_score: params.base_score,
            learning_rate: params.learning_rate,
            trees,
        })
    }

    /// Convenience wrapper that bins `x` itself.
    pub fn fit_dense(x: &Matrix, y: &[f64], params: &BoostParams) -> Result<Self> {
        params.validate()?;
        Booster::fit(&BinnedMatrix::new(x, params.max_bins), y, params)
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.value(row)).sum::<f64>()
    }
}

fn grow(x: &BinnedMatrix, g: &[f64], h: &[f64], params: &BoostParams) -> RegressionTree {
    let mut tree = RegressionTree { nodes: vec![] };
    let all: Vec<usize> = (0..x.rows).collect();
    tree.nodes.push(RegNode::Leaf { weight: 0.0 });
    let mut stack = vec![(0usize, all, 0usize)];
    while let Some((id, samples, depth)) = stack.pop() {
        let gs: f64 = samples.iter().map(|&i| g[i]).sum();
        let hs: f64 = samples.iter().map(|&i| h[i]).sum();
        let split = if depth < params.max_depth && samples.len() >= 2 {
            best_split(x, g, h, &samples, gs, hs, params)
        } else {
            None
        };
        match split {
            None => {
                tree.nodes[id] = RegNode::Leaf {
                    weight: leaf_weight(gs, hs, params.lambda),
                }
            }
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&i| x.bin(i, s.feature) <= s.bin);
                let left = tree.nodes.len();
                tree.nodes.push(RegNode::Leaf { weight: 0.0 });
                tree.nodes.push(RegNode::Leaf { weight: 0.0 });
                tree.nodes[id] = RegNode::Split {
                    feature: s.feature,
                    threshold: x.cuts[s.feature][s.bin],
                    left,
                    right: left + 1,
                };
                stack.push((left + 1, r, depth + 1));
                stack.push((left, l, depth + 1));
            }
        }
    }
    tree
}

fn best_split(
    x: &BinnedMatrix,
    g: &[f64],
    h: &[f64],
    samples: &[usize],
    gs: f64,
    hs: f64,
    params: &BoostParams,
) -> Option<SplitChoice> {
    let lambda = params.lambda;
    let parent = leaf_score(gs, hs, lambda);
    let per_feature = |f: usize| -> Option<SplitChoice> {
        let n_cuts = x.cuts[f].len();
        if n_cuts == 0 {
            return None;
        }
        let mut hist = vec![(0.0f64, 0.0f64); n_cuts + 1];
        for &i in samples {
            let b = x.bin(i, f);
            hist[b].0 += g[i];
            hist[b].1 += h[i];
        }
        let (mut gl, mut hl) = (0.0, 0.0);
        let mut best: Option<SplitChoice> = None;
        for (b, &(gb, hb)) in hist.iter().enumerate().take(n_cuts) {
            gl += gb;
            hl += hb;
            let (gr, hr) = (gs - gl, hs - hl);
            if hl < params.min_child_weight || hr < params.min_child_weight {
                continue;
            }
            let gain = 0.5 * (leaf_score(gl, hl, lambda) + leaf_score(gr, hr, lambda) - parent)
                - params.gamma;
            if best.as_ref().is_none_or(|s| gain > s.gain) {
                best = Some(SplitChoice {
                    feature: f,
                    bin: b,
                    gain,
                });
            }
        }
        best
    };
    let candidates: Vec<SplitChoice> = (0..x.cols)
        .into_par_iter()
        .filter_map(per_feature)
        .collect();
    // earliest feature wins ties, independent of scheduling
    let mut best: Option<SplitChoice> = None;
    for c in candidates {
        if best.as_ref().is_none_or(|b| c.gain > b.gain) {
            best = Some(c);
        }
    }
    best.filter(|s| s.gain > 0.0 && has_both_sides(x, samples, s))
}

fn has_both_sides(x: &BinnedMatrix, samples: &[usize], s: &SplitChoice) -> bool {
    let left = samples
        .iter()
        .filter(|&&i| x.bin(i, s.feature) <= s.bin)
        .count();
    left > 0 && left < samples.len()
}
