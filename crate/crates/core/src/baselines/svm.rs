use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{signed, FeatureMatrix};
use crate::error::{Error, Result};
use crate::pipeline::stratified_folds;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum SvmKernel {
    Linear,
    Rbf { gamma: f64 },
    Precomputed,
}

impl SvmKernel {
    fn eval(self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match self {
            SvmKernel::Linear => a.dot(&b),
            SvmKernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            SvmKernel::Precomputed => panic!("precomputed kernels have no feature map"),
        }
    }

    fn gram(self, a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
        match self {
            SvmKernel::Linear => a.dot(&b.t()),
            _ => Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| self.eval(a.row(i), b.row(j))),
        }
    }
}

/// `1 / (F · var(X))` over all entries, or 1 for constant input.
pub fn rbf_gamma(x: ArrayView2<'_, f64>) -> f64 {
    let var = x.iter().copied().collect::<ndarray::Array1<f64>>().var(0.0);
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// `rbf`, `linear` or `precomputed`.
    pub kernel: String,
    /// RBF bandwidth; `None` uses [`rbf_gamma`].
    pub gamma: Option<f64>,
    /// Maximal KKT violation at convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Select C and kernel by inner cross-validation over
    /// C in {0.1, 1, 10} and {linear, rbf}.
    pub grid_search: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, kernel: "rbf".into(), gamma: None, tol: 1e-3, max_iter: 10_000_000, grid_search: false }
    }
}

/// Dual solution of `min ½αᵀQα − Σα` s.t. `0 ≤ α ≤ C`, `yᵀα = 0`,
/// with `Q_ij = y_i y_j K_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub violation: f64,
}

/// SMO with second-order working-set selection on a dense kernel matrix.
pub fn svm_solve(k: ArrayView2<'_, f64>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[[i, j]];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let mut iterations = 0;
    let mut violation;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let b = gmax + v;
            if i != usize::MAX && b > 0.0 {
                let a = k[[i, i]] + k[[t, t]] - 2.0 * k[[i, t]];
                let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        violation = gmax + gmax2;
        if violation < tol || j == usize::MAX || iterations >= max_iter {
            break;
        }
        iterations += 1;
        let (ai, aj) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }
    // offset from free variables, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    DualSolution { alpha, bias: -rho, objective, iterations, violation }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: SvmKernel,
    pub c: f64,
    /// `α_i y_i` for each support vector.
    pub support_coefficients: Vec<f64>,
    /// Positions of the support vectors in the training set.
    pub support_indices: Vec<usize>,
    /// Support vectors in feature space; empty for precomputed kernels.
    pub support_vectors: Vec<Vec<f64>>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_violation: f64,
}

impl SvmModel {
    fn from_dual(sol: DualSolution, y: &[f64], kernel: SvmKernel, c: f64, x: Option<ArrayView2<'_, f64>>) -> Self {
        let support_indices: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
        SvmModel {
            kernel,
            c,
            support_coefficients: support_indices.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
            support_vectors: x.map_or_else(Vec::new, |x| support_indices.iter().map(|&i| x.row(i).to_vec()).collect()),
            support_indices,
            bias: sol.bias,
            objective: sol.objective,
            iterations: sol.iterations,
            kkt_violation: sol.violation,
        }
    }

    /// Decision values for feature rows.
    pub fn decision(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if self.kernel == SvmKernel::Precomputed {
            return Err(Error::InvalidConfig("precomputed model needs kernel rows".into()));
        }
        let sv = Array2::from_shape_vec(
            (self.support_vectors.len(), rows.ncols()),
            self.support_vectors.iter().flatten().copied().collect(),
        )
        .map_err(|_| Error::DimensionMismatch {
            expected: self.support_vectors.first().map_or(0, Vec::len),
            got: rows.ncols(),
        })?;
        let k = self.kernel.gram(rows, sv.view());
        Ok(k.rows().into_iter().map(|r| r.dot(&ndarray::aview1(&self.support_coefficients)) + self.bias).collect())
    }

    /// Decision values from kernel rows against all training graphs.
    pub fn decision_precomputed(&self, kernel_rows: ArrayView2<'_, f64>) -> Vec<f64> {
        kernel_rows
            .rows()
            .into_iter()
            .map(|r| {
                self.support_indices.iter().zip(&self.support_coefficients).map(|(&i, a)| a * r[i]).sum::<f64>()
                    + self.bias
            })
            .collect()
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        Ok(self.decision(rows)?.into_iter().map(|d| usize::from(d > 0.0)).collect())
    }

    pub fn predict_precomputed(&self, kernel_rows: ArrayView2<'_, f64>) -> Vec<usize> {
        self.decision_precomputed(kernel_rows).into_iter().map(|d| usize::from(d > 0.0)).collect()
    }
}

fn resolve_kernel(cfg: &SvmConfig, x: ArrayView2<'_, f64>) -> Result<SvmKernel> {
    match cfg.kernel.as_str() {
        "linear" => Ok(SvmKernel::Linear),
        "rbf" => Ok(SvmKernel::Rbf { gamma: cfg.gamma.unwrap_or_else(|| rbf_gamma(x)) }),
        other => Err(Error::InvalidConfig(format!("unsupported feature kernel {other:?}"))),
    }
}

/// C-SVM on feature rows.
pub fn svm_fit(train: &FeatureMatrix, cfg: &SvmConfig) -> Result<SvmModel> {
    train.require_two_classes()?;
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidConfig("C must be positive".into()));
    }
    let kernel = resolve_kernel(cfg, train.rows.view())?;
    let y = signed(&train.labels);
    let k = kernel.gram(train.rows.view(), train.rows.view());
    let sol = svm_solve(k.view(), &y, cfg.c, cfg.tol, cfg.max_iter);
    Ok(SvmModel::from_dual(sol, &y, kernel, cfg.c, Some(train.rows.view())))
}

/// C-SVM on a precomputed training kernel matrix.
pub fn svm_fit_precomputed(kernel: ArrayView2<'_, f64>, labels: &[crate::sequence_io::Label], cfg: &SvmConfig) -> Result<SvmModel> {
    if kernel.nrows() != labels.len() || kernel.ncols() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: kernel.nrows() });
    }
    let y = signed(labels);
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
        return Err(Error::SingleClass);
    }
    let sol = svm_solve(kernel, &y, cfg.c, cfg.tol, cfg.max_iter);
    Ok(SvmModel::from_dual(sol, &y, SvmKernel::Precomputed, cfg.c, None))
}

/// Picks C and kernel by 3-fold stratified cross-validation on the
/// training rows, then refits on all of them.
pub fn svm_grid_search(train: &FeatureMatrix, cfg: &SvmConfig, seed: u64) -> Result<(SvmModel, SvmConfig)> {
    train.require_two_classes()?;
    let classes = train.class_indices();
    let folds = stratified_folds(&classes, 3, seed)?;
    let mut best: Option<(f64, SvmConfig)> = None;
    for kernel in ["linear", "rbf"] {
        for c in [0.1, 1.0, 10.0] {
            let cand = SvmConfig { c, kernel: kernel.into(), grid_search: false, ..cfg.clone() };
            let mut correct = 0usize;
            for test in &folds {
                let train_idx: Vec<usize> = (0..train.len()).filter(|i| !test.contains(i)).collect();
                let inner = train.subset(&train_idx);
                if inner.require_two_classes().is_err() {
                    continue;
                }
                let model = svm_fit(&inner, &cand)?;
                let pred = model.predict(train.rows.select(Axis(0), test).view())?;
                correct += pred.iter().zip(test).filter(|(p, &t)| **p == classes[t]).count();
            }
            let acc = correct as f64 / train.len() as f64;
            if best.as_ref().map_or(true, |(b, _)| acc > *b) {
                best = Some((acc, cand));
            }
        }
    }
    let (_, chosen) = best.expect("grid is non-empty");
    Ok((svm_fit(train, &chosen)?, chosen))
}
