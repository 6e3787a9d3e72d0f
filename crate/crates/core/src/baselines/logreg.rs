use std::collections::VecDeque;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{signed, FeatureMatrix};
use crate::embed::sigmoid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    /// Inverse regularization strength.
    pub c: f64,
    /// Stop when the gradient 2-norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { c: 10.0, tol: 1e-6, max_iter: 10_000, memory: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub reg_c: f64,
    pub penalty: Penalty,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl LinearModel {
    pub fn decision(&self, rows: ArrayView2<'_, f64>) -> Vec<f64> {
        rows.rows()
            .into_iter()
            .map(|r| r.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias)
            .collect()
    }

    /// Class 1 when the logit is positive.
    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Vec<usize> {
        self.decision(rows).into_iter().map(|z| usize::from(z > 0.0)).collect()
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `C Σ log(1 + exp(-y_i (w·x_i + b))) + ½‖w‖²` and its gradient; `theta`
/// holds the weights followed by the unpenalized bias.
pub fn logreg_objective(theta: &[f64], x: ArrayView2<'_, f64>, y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let f = x.ncols();
    let (w, b) = (&theta[..f], theta[f]);
    let mut grad = vec![0.0; f + 1];
    let mut loss = 0.0;
    for (row, &yi) in x.rows().into_iter().zip(y) {
        let z = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
        loss += softplus(-yi * z);
        let g = -yi * sigmoid(-yi * z) * c;
        for (gj, xj) in grad.iter_mut().zip(row.iter()) {
            *gj += g * xj;
        }
        grad[f] += g;
    }
    let mut obj = c * loss;
    for (gj, wj) in grad.iter_mut().zip(w) {
        *gj += wj;
        obj += 0.5 * wj * wj;
    }
    (obj, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const F_TOL: f64 = 1e-12;

/// L2-regularized logistic regression fitted by L-BFGS with backtracking.
pub fn logreg_fit(train: &FeatureMatrix, cfg: &LogRegConfig) -> Result<LinearModel> {
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::InvalidConfig("C must be positive".into()));
    }
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if train.rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    let x = train.rows.view();
    let y = signed(&train.labels);
    let eval = |t: &[f64]| logreg_objective(t, x, &y, cfg.c);
    let mut theta = vec![0.0; x.ncols() + 1];
    let (mut fx, mut g) = eval(&theta);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    // The objective scales with C·n, so the gradient test is relative to
    // the starting gradient; a stalled objective also ends the search.
    let gtol = cfg.tol * norm(&g).max(1.0);
    while norm(&g) >= gtol && iterations < cfg.max_iter {
        iterations += 1;
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(yv).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(yv, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if history.is_empty() { (1.0 / norm(&g)).min(1.0) } else { 1.0 };
        let accepted = loop {
            let cand: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t + step * di).collect();
            let (fc, gc) = eval(&cand);
            if fc <= fx + 1e-4 * step * slope {
                break Some((cand, fc, gc));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((cand, fc, gc)) = accepted else { break };
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv) {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        let stalled = (fx - fc) <= F_TOL * fx.abs().max(fc.abs()).max(1.0);
        theta = cand;
        fx = fc;
        g = gc;
        if stalled {
            break;
        }
    }
    let f = x.ncols();
    Ok(LinearModel {
        weights: theta[..f].to_vec(),
        bias: theta[f],
        reg_c: cfg.c,
        penalty: Penalty::L2,
        iterations,
        grad_norm: norm(&g),
    })
}
