//! L2-regularized logistic regression fitted by damped Newton steps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub l2_penalty: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm of the objective is below this.
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            l2_penalty: 1e-3,
            max_iters: 100,
            tol: 1e-8,
        }
    }
}

/// Weights act on standardized features; `weights[0]` is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl LogisticModel {
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        let z = self.standardize(x);
        self.weights[0]
            + z.iter()
                .zip(&self.weights[1..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
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

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(w: &[f64], x: &[f64]) -> f64 {
    w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// Mean negative log-likelihood plus (λ/2)·‖w‖² over the non-intercept
/// weights. `features` must already be standardized.
pub fn penalized_loss(
    weights: &[f64],
    features: &[Vec<f64>],
    labels: &[bool],
    l2_penalty: f64,
) -> f64 {
    let n = features.len() as f64;
    let nll: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = linear(weights, x);
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    nll / n + 0.5 * l2_penalty * weights[1..].iter().map(|w| w * w).sum::<f64>()
}

pub fn penalized_gradient(
    weights: &[f64],
    features: &[Vec<f64>],
    labels: &[bool],
    l2_penalty: f64,
) -> Vec<f64> {
    let n = features.len() as f64;
    let mut g = vec![0.0; weights.len()];
    for (x, &y) in features.iter().zip(labels) {
        let r = sigmoid(linear(weights, x)) - f64::from(u8::from(y));
        g[0] += r;
        for (gj, xj) in g[1..].iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    for (j, gj) in g.iter_mut().enumerate() {
        *gj /= n;
        if j > 0 {
            *gj += l2_penalty * weights[j];
        }
    }
    g
}

fn hessian(weights: &[f64], features: &[Vec<f64>], l2_penalty: f64) -> DMatrix<f64> {
    let d = weights.len();
    let n = features.len() as f64;
    let mut h = DMatrix::<f64>::zeros(d, d);
    let mut row = vec![1.0; d];
    for x in features {
        row[1..].copy_from_slice(x);
        let p = sigmoid(linear(weights, x));
        let s = p * (1.0 - p) / n;
        for a in 0..d {
            let sa = s * row[a];
            for b in a..d {
                h[(a, b)] += sa * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
        if a > 0 {
            h[(a, a)] += l2_penalty;
        }
    }
    h
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn fit_logistic(
    features: &[Vec<f64>],
    labels: &[bool],
    opts: &LogisticOptions,
) -> Result<LogisticModel> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if !(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y)) {
        return Err(Error::SingleClass);
    }
    let dim = features[0].len();
    if let Some(x) = features.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    let n = features.len() as f64;
    let mean: Vec<f64> = (0..dim)
        .map(|j| features.iter().map(|x| x[j]).sum::<f64>() / n)
        .collect();
    let scale: Vec<f64> = (0..dim)
        .map(|j| {
            let var = features
                .iter()
                .map(|x| (x[j] - mean[j]).powi(2))
                .sum::<f64>()
                / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let z: Vec<Vec<f64>> = features
        .iter()
        .map(|x| (0..dim).map(|j| (x[j] - mean[j]) / scale[j]).collect())
        .collect();

    let mut w = vec![0.0; dim + 1];
    let mut loss = penalized_loss(&w, &z, labels, opts.l2_penalty);
    let mut grad = penalized_gradient(&w, &z, labels, opts.l2_penalty);
    let mut iterations = 0;
    while norm(&grad) >= opts.tol && iterations < opts.max_iters {
        let mut h = hessian(&w, &z, opts.l2_penalty);
        let g = DVector::from_column_slice(&grad);
        // The intercept is unpenalized; a tiny ridge keeps H positive definite
        // on separable data.
        let step = loop {
            if let Some(ch) = h.clone().cholesky() {
                break ch.solve(&g);
            }
            for a in 0..=dim {
                h[(a, a)] += 1e-10_f64.max(h[(a, a)] * 1e-8);
            }
        };
        let mut t = 1.0;
        let slope: f64 = -g.dot(&step);
        let next = loop {
            let cand: Vec<f64> = w.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let l = penalized_loss(&cand, &z, labels, opts.l2_penalty);
            if l <= loss + 1e-4 * t * slope || t < 1e-10 {
                break (cand, l);
            }
            t *= 0.5;
        };
        w = next.0;
        loss = next.1;
        grad = penalized_gradient(&w, &z, labels, opts.l2_penalty);
        iterations += 1;
    }
    Ok(LogisticModel {
        weights: w,
        feature_mean: mean,
        feature_scale: scale,
        iterations,
        gradient_norm: norm(&grad),
    })
}
