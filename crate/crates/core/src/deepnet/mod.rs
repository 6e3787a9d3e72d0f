//! Multi-task encoder/decoder/classifier network and its staged training.

mod loss;
mod model;
mod train;

use std::io::{BufRead, Write};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use loss::{inverse_frequency_weights, multitask_loss, LossBreakdown, LossConfig};
pub use model::{Architecture, Dense, Forward, Module, MultiTaskModel};
pub use train::{predict, train, EpochMetrics, Optimizer, PhaseSpec, TrainSchedule, Variant};

use crate::baselines::Standardizer;
use crate::binmat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeepConfig {
    pub schedule: TrainSchedule,
    pub loss: LossConfig,
    pub dropout: f64,
    pub variant: Variant,
    /// Centre and scale inputs with training statistics before the network.
    pub standardize: bool,
}

impl Default for DeepConfig {
    fn default() -> Self {
        DeepConfig {
            schedule: TrainSchedule::small(),
            loss: LossConfig::default(),
            dropout: 0.5,
            variant: Variant::Dl,
            standardize: true,
        }
    }
}

/// Trained network together with the standardization it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepClassifier {
    pub model: MultiTaskModel,
    pub standardizer: Standardizer,
    pub class_weights: [f64; 2],
    pub cfg: DeepConfig,
    pub seed: u64,
    pub history: Vec<EpochMetrics>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    dims: Architecture,
    schedule: TrainSchedule,
    loss: LossConfig,
    dropout: f64,
    variant: Variant,
    class_weights: [f64; 2],
    seed: u64,
    standardize: bool,
    standardization: Standardizer,
    history: Vec<EpochMetrics>,
}

impl DeepClassifier {
    /// Trains on `rows`, standardized with their own statistics when the
    /// configuration asks for it.
    pub fn fit(rows: ArrayView2<'_, f64>, labels: &[usize], cfg: &DeepConfig, seed: u64) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Empty("training set"));
        }
        let standardizer = if cfg.standardize { Standardizer::fit(rows)? } else { Standardizer::identity(rows.ncols()) };
        let x = standardizer.apply(rows)?;
        let class_weights = cfg.loss.class_weights.unwrap_or_else(|| inverse_frequency_weights(labels));
        let mut model = MultiTaskModel::new(Architecture::for_input(rows.ncols()), cfg.dropout, seed)?;
        let history = train(&mut model, x.view(), labels, &cfg.schedule, &cfg.loss, class_weights, cfg.variant, seed)?;
        Ok(DeepClassifier { model, standardizer, class_weights, cfg: cfg.clone(), seed, history })
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        Ok(predict(&self.model, self.standardizer.apply(rows)?.view())?.0)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let header = Header {
            dims: self.model.arch.clone(),
            schedule: self.cfg.schedule.clone(),
            loss: self.cfg.loss.clone(),
            dropout: self.cfg.dropout,
            variant: self.cfg.variant,
            class_weights: self.class_weights,
            seed: self.seed,
            standardize: self.cfg.standardize,
            standardization: self.standardizer.clone(),
            history: self.history.clone(),
        };
        binmat::write(out, &header, &self.model.flatten())
    }
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<DeepClassifier> {
    let mut expected = 0;
    let (h, params): (Header, Vec<f64>) = binmat::read(input, |h: &Header| {
        expected = MultiTaskModel::new(h.dims.clone(), 0.0, 0).map_or(0, |m| m.param_count());
        expected
    })?;
    let mut model = MultiTaskModel::new(h.dims, h.dropout, 0)?;
    model.unflatten(&params)?;
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("checkpoint parameters"));
    }
    Ok(DeepClassifier {
        model,
        standardizer: h.standardization,
        class_weights: h.class_weights,
        cfg: DeepConfig {
            schedule: h.schedule,
            loss: h.loss,
            dropout: h.dropout,
            variant: h.variant,
            standardize: h.standardize,
        },
        seed: h.seed,
        history: h.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let x = Array2::from_shape_fn((40, 6), |(i, j)| ((i * 7 + j * 3) % 11) as f64 + if i % 2 == 1 { 4.0 } else { 0.0 });
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let cfg = DeepConfig {
            schedule: TrainSchedule { phase2: PhaseSpec { epochs: 3, lr: 1e-3 }, ..TrainSchedule::small() },
            ..Default::default()
        };
        let clf = DeepClassifier::fit(x.view(), &y, &cfg, 2).unwrap();
        let mut buf = Vec::new();
        clf.write(&mut buf).unwrap();
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back, clf);
        assert_eq!(back.predict(x.view()).unwrap(), clf.predict(x.view()).unwrap());
        assert!(read_checkpoint(&buf[..buf.len() - 8]).is_err());
    }
}
