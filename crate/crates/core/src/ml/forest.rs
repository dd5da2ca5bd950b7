//! Random forests (bootstrap + best split over a random feature subset) and
//! extremely randomised trees (full sample + random cut-points).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, SplitRule, TreeParams};
use super::{stream_rng, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl ForestParams {
    pub fn random_forest() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams {
                max_features: MaxFeatures::Sqrt,
                ..TreeParams::default()
            },
        }
    }

    pub fn extra_trees() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: false,
            tree: TreeParams {
                max_features: MaxFeatures::Sqrt,
                rule: SplitRule::Random,
                ..TreeParams::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidHyperparameter(
                "forest needs at least one tree".into(),
            ));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl Forest {
    /// Tree `t` draws from stream `t` of `seed`.
    pub fn fit(data: &Dataset, params: &ForestParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let n = data.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, t as u64);
                let sample: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(data, &sample, &params.tree, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Forest {
            n_classes: data.n_classes,
            n_features: data.n_features(),
            trees,
        })
    }

    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        Forest {
            n_classes: trees[0].n_classes,
            n_features: trees[0].n_features,
            trees,
        }
    }

    /// Share of trees voting for each class.
    pub fn vote_fractions(&self, row: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        votes
    }
}
