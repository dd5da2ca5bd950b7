//! Binary logistic regression fitted by batch gradient descent with
//! step halving.
//!
//! The objective is the mean cross-entropy plus `λ/2·‖w‖²` with
//! `λ = 1/(n·C)`; the intercept is not penalised.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::dot;
use super::{sigmoid, BinaryScorer, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Inverse regularisation strength.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the largest gradient component falls below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidHyperparameter(format!(
                "logistic needs C > 0, tol > 0, max_iter >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinaryScorer for BinaryLogistic {
    fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn margins(x: &Matrix, w: &[f64], b: f64) -> Vec<f64> {
    (0..x.rows())
        .into_par_iter()
        .map(|i| dot(x.row(i), w) + b)
        .collect()
}

/// `mean_i [log(1 + e^{z_i}) − y_i z_i] + λ/2·‖w‖²` with `z = Xw + b`.
pub fn logistic_objective(x: &Matrix, y: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let z = margins(x, w, b);
    let loss: f64 = z.iter().zip(y).map(|(&z, &y)| softplus(z) - y * z).sum();
    loss / x.rows() as f64 + 0.5 * lambda * dot(w, w)
}

/// Gradient of [`logistic_objective`] with respect to `(w, b)`.
pub fn logistic_gradient(x: &Matrix, y: &[f64], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let n = x.rows() as f64;
    let residual: Vec<f64> = margins(x, w, b)
        .into_iter()
        .zip(y)
        .map(|(z, &y)| sigmoid(z) - y)
        .collect();
    let d = x.cols();
    let chunk = 64.max(d / rayon::current_num_threads().max(1) + 1);
    let mut gw = vec![0.0; d];
    gw.par_chunks_mut(chunk).enumerate().for_each(|(c, out)| {
        let start = c * chunk;
        for (i, r) in residual.iter().enumerate() {
            let row = &x.row(i)[start..start + out.len()];
            out.iter_mut().zip(row).for_each(|(g, v)| *g += r * v);
        }
    });
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * wj;
    }
    let gb = residual.iter().sum::<f64>() / n;
    (gw, gb)
}

impl BinaryLogistic {
    /// `y` holds 0/1 targets.
    pub fn fit(x: &Matrix, y: &[f64], params: &LogisticParams) -> Result<Self> {
        let lambda = 1.0 / (x.rows() as f64 * params.c);
        let mut w = vec![0.0; x.cols()];
        let mut b = 0.0;
        let mut value = logistic_objective(x, y, &w, b, lambda);
        let mut step = 1.0;
        for _ in 0..params.max_iter {
            let (gw, gb) = logistic_gradient(x, y, &w, b, lambda);
            let largest = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
            if largest < params.tol {
                break;
            }
            let sq_norm = dot(&gw, &gw) + gb * gb;
            let mut accepted = false;
            for _ in 0..60 {
                let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wj, g)| wj - step * g).collect();
                let cand_b = b - step * gb;
                let cand = logistic_objective(x, y, &cand_w, cand_b, lambda);
                // sufficient decrease
                if cand <= value - 0.5 * step * sq_norm {
                    w = cand_w;
                    b = cand_b;
                    value = cand;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            step *= 2.0;
        }
        Ok(BinaryLogistic {
            weights: w,
            bias: b,
        })
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_half() {
        let m = BinaryLogistic {
            weights: vec![0.0; 3],
            bias: 0.0,
        };
        assert_eq!(m.probability(&[1.0, -2.0, 7.0]), 0.5);
    }

    #[test]
    fn separable_pair() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]).unwrap();
        let m = BinaryLogistic::fit(&x, &[0.0, 1.0], &LogisticParams::default()).unwrap();
        assert!(m.decision(&[-1.0]) < 0.0);
        assert!(m.decision(&[1.0]) > 0.0);
    }

    #[test]
    fn converges_to_stationary_point() {
        let x = Matrix::from_rows(&[
            vec![0.5, 1.0],
            vec![-1.0, 0.3],
            vec![1.5, -0.2],
            vec![-0.3, -1.1],
            vec![0.1, 0.1],
        ])
        .unwrap();
        let y = [1.0, 0.0, 1.0, 0.0, 1.0];
        let p = LogisticParams::default();
        let m = BinaryLogistic::fit(&x, &y, &p).unwrap();
        let (gw, gb) = logistic_gradient(&x, &y, &m.weights, m.bias, 1.0 / 5.0);
        assert!(gw.iter().all(|g| g.abs() < 1e-5) && gb.abs() < 1e-5);
    }
}
