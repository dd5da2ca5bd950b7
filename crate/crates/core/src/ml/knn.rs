use serde::{Deserialize, Serialize};

use super::matrix::squared_distance;
use super::{Dataset, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidHyperparameter("k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Euclidean k-nearest-neighbour vote over the stored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub n_classes: usize,
    pub train: Matrix,
    pub labels: Vec<usize>,
}

impl Knn {
    pub fn fit(data: &Dataset, params: &KnnParams) -> Result<Self> {
        params.validate()?;
        Ok(Knn {
            k: params.k.min(data.len()),
            n_classes: data.n_classes,
            train: data.features.clone(),
            labels: data.labels.clone(),
        })
    }

    /// Indices of the `k` nearest training rows; distance ties go to the
    /// earlier row.
    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .train
            .iter_rows()
            .enumerate()
            .map(|(i, t)| (squared_distance(t, row), i))
            .collect();
        let by_distance =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(by_distance);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    /// Fraction of the `k` neighbours in each class.
    pub fn vote_fractions(&self, row: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for i in self.neighbours(row) {
            votes[self.labels[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= self.k as f64);
        votes
    }
}
