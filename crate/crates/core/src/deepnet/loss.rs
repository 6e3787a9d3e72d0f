use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Per-class weights of the cross entropy; `None` derives inverse
    /// class frequencies (mean 1) from the training labels.
    pub class_weights: Option<[f64; 2]>,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { lambda1: 2.0, lambda2: 0.5, class_weights: None }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0 && self.lambda1.is_finite() && self.lambda2.is_finite()) {
            return Err(Error::InvalidConfig("loss weights must be non-negative".into()));
        }
        if let Some(w) = self.class_weights {
            if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig("class weights must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Inverse class frequencies scaled to mean 1. A missing class gets
/// weight 1.
pub fn inverse_frequency_weights(labels: &[usize]) -> [f64; 2] {
    let n1 = labels.iter().filter(|&&c| c == 1).count() as f64;
    let n0 = labels.len() as f64 - n1;
    if n0 == 0.0 || n1 == 0.0 {
        return [1.0, 1.0];
    }
    let (w0, w1) = (1.0 / n0, 1.0 / n1);
    let mean = 0.5 * (w0 + w1);
    [w0 / mean, w1 / mean]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub ce: f64,
    pub rc: f64,
    pub total: f64,
}

/// Batch loss `λ1·L_ce + λ2·L_rc` with both terms averaged over the batch;
/// `L_rc` is the per-sample squared L2 reconstruction error. Also returns
/// the derivatives with respect to logits and reconstruction.
pub fn multitask_loss(
    logits: &Array2<f64>,
    reconstruction: &Array2<f64>,
    x: &Array2<f64>,
    labels: &[usize],
    lambda1: f64,
    lambda2: f64,
    class_weights: [f64; 2],
) -> (LossBreakdown, Array2<f64>, Array2<f64>) {
    let b = labels.len() as f64;
    let mut ce = 0.0;
    let mut d_logits = Array2::zeros(logits.raw_dim());
    for (i, (row, &y)) in logits.rows().into_iter().zip(labels).enumerate() {
        let m = row[0].max(row[1]);
        let e0 = (row[0] - m).exp();
        let e1 = (row[1] - m).exp();
        let lse = m + (e0 + e1).ln();
        let w = class_weights[y];
        ce += w * (lse - row[y]);
        let p = [e0 / (e0 + e1), e1 / (e0 + e1)];
        for c in 0..2 {
            let target = if c == y { 1.0 } else { 0.0 };
            d_logits[[i, c]] = lambda1 * w * (p[c] - target) / b;
        }
    }
    ce /= b;
    let diff = reconstruction - x;
    let rc = diff.iter().map(|d| d * d).sum::<f64>() / b;
    let d_recon = diff * (2.0 * lambda2 / b);
    let total = lambda1 * ce + lambda2 * rc;
    (LossBreakdown { ce, rc, total }, d_logits, d_recon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_logits_give_ln2() {
        let x = array![[1.0, 2.0]];
        let (l, _, _) = multitask_loss(&array![[0.0, 0.0]], &x, &x, &[1], 2.0, 0.5, [1.0, 1.0]);
        assert!((l.ce - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(l.rc, 0.0);
        assert_eq!(l.total, 2.0 * l.ce);
    }

    #[test]
    fn total_combines_terms() {
        // CE of 1 needs p_y = e^-1; reconstruction error 4 from a 2-unit miss
        let p = (-1.0f64).exp();
        let logit = (p / (1.0 - p)).ln();
        let (l, _, _) =
            multitask_loss(&array![[0.0, logit]], &array![[2.0]], &array![[0.0]], &[1], 2.0, 0.5, [1.0, 1.0]);
        assert!((l.ce - 1.0).abs() < 1e-12);
        assert_eq!(l.rc, 4.0);
        assert!((l.total - 4.0).abs() < 1e-12);
        assert!((l.total - (2.0 * l.ce + 0.5 * l.rc)).abs() < 1e-12);
    }

    #[test]
    fn balanced_weights_are_one() {
        assert_eq!(inverse_frequency_weights(&[0, 1, 1, 0]), [1.0, 1.0]);
        let w = inverse_frequency_weights(&[0; 9].iter().copied().chain([1]).collect::<Vec<_>>());
        assert!((w[0] + w[1] - 2.0).abs() < 1e-12 && w[1] > w[0]);
        assert_eq!(inverse_frequency_weights(&[1, 1]), [1.0, 1.0]);
    }

    #[test]
    fn validation() {
        assert!(LossConfig::default().validate().is_ok());
        assert!(LossConfig { lambda1: -1.0, ..Default::default() }.validate().is_err());
        assert!(LossConfig { class_weights: Some([0.0, 1.0]), ..Default::default() }.validate().is_err());
    }
}
