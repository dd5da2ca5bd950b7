//! RBF-kernel SVM trained with the kernelised Pegasos stochastic
//! sub-gradient method.
//!
//! With `λ = 1/(n·C)` and `T` iterations, each step draws one sample `i`
//! and increments its count `α_i` whenever
//! `y_i · (1/(λt)) Σ_j α_j y_j K(x_j, x_i) < 1`. The decision function is
//! `f(x) = (1/(λT)) Σ_j α_j y_j K(x_j, x)`. This approximates the exact
//! soft-margin dual without a bias term.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::squared_distance;
use super::{BinaryScorer, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / (d · Var(X))` over the training matrix.
    pub gamma: Option<f64>,
    /// Iterations per training sample.
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            epochs: 20,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || self.epochs == 0 || self.gamma.is_some_and(|g| !(g > 0.0)) {
            return Err(Error::InvalidHyperparameter(format!(
                "svm needs C > 0, gamma > 0, epochs >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `1 / (d · Var(X))` with the variance taken over every entry of `x`.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let values = x.as_slice();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSvm {
    pub gamma: f64,
    pub support: Matrix,
    /// `α_j y_j / (λT)` for each support row.
    pub coef: Vec<f64>,
}

impl BinaryScorer for KernelSvm {
    fn decision(&self, row: &[f64]) -> f64 {
        self.support
            .iter_rows()
            .zip(&self.coef)
            .map(|(s, c)| c * (-self.gamma * squared_distance(s, row)).exp())
            .sum()
    }
}

impl KernelSvm {
    /// `y` holds 0/1 targets, mapped to −1/+1.
    pub fn fit(x: &Matrix, y: &[f64], params: &SvmParams, mut rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        let n = x.rows();
        let gamma = params.gamma.unwrap_or_else(|| scale_gamma(x));
        let lambda = 1.0 / (n as f64 * params.c);
        let sign: Vec<f64> = y
            .iter()
            .map(|&v| if v > 0.5 { 1.0 } else { -1.0 })
            .collect();
        let kernel_row = |i: usize| -> Vec<f64> {
            let xi = x.row(i);
            (0..n)
                .into_par_iter()
                .map(|j| (-gamma * squared_distance(xi, x.row(j))).exp())
                .collect()
        };

        let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
        let mut alpha = vec![0u32; n];
        // running Σ_j α_j y_j K(x_j, x_i) for every i
        let mut sums = vec![0.0; n];
        let total = params.epochs * n;
        for t in 1..=total {
            let i = rng.gen_range(0..n);
            if sign[i] * sums[i] / (lambda * t as f64) < 1.0 {
                alpha[i] += 1;
                let k = rows[i].get_or_insert_with(|| kernel_row(i));
                for (s, kij) in sums.iter_mut().zip(k.iter()) {
                    *s += sign[i] * kij;
                }
            }
        }

        let scale = 1.0 / (lambda * total as f64);
        let support_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0).collect();
        Ok(KernelSvm {
            gamma,
            support: x.select_rows(&support_idx),
            coef: support_idx
                .iter()
                .map(|&i| alpha[i] as f64 * sign[i] * scale)
                .collect(),
        })
    }
}
