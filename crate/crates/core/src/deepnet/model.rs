use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_from, tag, Rng};

/// Layer widths of the three sub-networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    /// Five halving widths, floored at 2.
    pub encoder: Vec<usize>,
    pub decoder_hidden: usize,
    pub classifier_hidden: usize,
}

impl Architecture {
    pub fn for_input(n: usize) -> Self {
        let encoder: Vec<usize> = (1..=5).map(|i| (n >> i).max(2)).collect();
        let latent = encoder[4];
        Architecture { input: n, encoder, decoder_hidden: (n / 4).max(2), classifier_hidden: latent }
    }

    pub fn latent(&self) -> usize {
        *self.encoder.last().expect("five encoder layers")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn glorot(rng: &mut Rng, input: usize, output: usize) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        Dense {
            w: Array2::from_shape_simple_fn((input, output), || rng.gen_range(-limit..limit)),
            b: Array1::zeros(output),
        }
    }

    fn zeros_like(&self) -> Self {
        Dense { w: Array2::zeros(self.w.raw_dim()), b: Array1::zeros(self.b.len()) }
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Encoder,
    Decoder,
    Classifier,
}

/// Dense layers of the encoder, decoder and classification head.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskModel {
    pub arch: Architecture,
    pub dropout: f64,
    pub encoder: Vec<Dense>,
    pub decoder: Vec<Dense>,
    pub classifier: Vec<Dense>,
}

/// Intermediate values kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Forward {
    pub logits: Array2<f64>,
    pub reconstruction: Array2<f64>,
    pub latent: Array2<f64>,
    input: Array2<f64>,
    encoder_pre: Vec<Array2<f64>>,
    encoder_out: Vec<Array2<f64>>,
    masks: Option<Vec<Array2<f64>>>,
    decoder_pre: Array2<f64>,
    classifier_pre: Array2<f64>,
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

fn relu_back(grad: Array2<f64>, pre: &Array2<f64>) -> Array2<f64> {
    let mut g = grad;
    g.zip_mut_with(pre, |g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
    g
}

impl MultiTaskModel {
    pub fn new(arch: Architecture, dropout: f64, seed: u64) -> Result<Self> {
        if arch.input == 0 {
            return Err(Error::InvalidConfig("input width must be positive".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidConfig("dropout must lie in [0, 1)".into()));
        }
        let mut rng = rng_from(seed, &[tag("init")]);
        let mut encoder = Vec::new();
        let mut prev = arch.input;
        for &w in &arch.encoder {
            encoder.push(Dense::glorot(&mut rng, prev, w));
            prev = w;
        }
        let latent = arch.latent();
        let decoder = vec![
            Dense::glorot(&mut rng, latent, arch.decoder_hidden),
            Dense::glorot(&mut rng, arch.decoder_hidden, arch.input),
        ];
        let classifier = vec![
            Dense::glorot(&mut rng, latent, arch.classifier_hidden),
            Dense::glorot(&mut rng, arch.classifier_hidden, 2),
        ];
        Ok(MultiTaskModel { arch, dropout, encoder, decoder, classifier })
    }

    pub fn module(&self, m: Module) -> &[Dense] {
        match m {
            Module::Encoder => &self.encoder,
            Module::Decoder => &self.decoder,
            Module::Classifier => &self.classifier,
        }
    }

    pub fn module_mut(&mut self, m: Module) -> &mut Vec<Dense> {
        match m {
            Module::Encoder => &mut self.encoder,
            Module::Decoder => &mut self.decoder,
            Module::Classifier => &mut self.classifier,
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |layers: &[Dense]| layers.iter().map(Dense::zeros_like).collect();
        MultiTaskModel {
            arch: self.arch.clone(),
            dropout: self.dropout,
            encoder: z(&self.encoder),
            decoder: z(&self.decoder),
            classifier: z(&self.classifier),
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.encoder.iter().chain(&self.decoder).chain(&self.classifier)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut()).chain(self.classifier.iter_mut())
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(Dense::param_count).sum()
    }

    /// Inverted-dropout masks for a batch: entries are 0 or `1/(1-p)`.
    /// Dropout sits between encoder layers, so the latent layer's mask is
    /// all ones.
    pub fn sample_masks(&self, batch: usize, rng: &mut Rng) -> Vec<Array2<f64>> {
        let keep = 1.0 - self.dropout;
        let last = self.arch.encoder.len() - 1;
        self.arch
            .encoder
            .iter()
            .enumerate()
            .map(|(l, &w)| {
                if l == last {
                    Array2::ones((batch, w))
                } else {
                    Array2::from_shape_simple_fn((batch, w), || if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                }
            })
            .collect()
    }

    /// Forward pass over a batch; `masks` switches dropout on.
    pub fn forward(&self, x: ArrayView2<'_, f64>, masks: Option<Vec<Array2<f64>>>) -> Result<Forward> {
        if x.ncols() != self.arch.input {
            return Err(Error::DimensionMismatch { expected: self.arch.input, got: x.ncols() });
        }
        let mut encoder_pre = Vec::with_capacity(5);
        let mut encoder_out = Vec::with_capacity(5);
        let mut h = x.to_owned();
        for (l, layer) in self.encoder.iter().enumerate() {
            let z = layer.apply(h.view());
            let mut a = relu(&z);
            if let Some(m) = &masks {
                a *= &m[l];
            }
            encoder_pre.push(z);
            encoder_out.push(a.clone());
            h = a;
        }
        let latent = h;
        let decoder_pre = self.decoder[0].apply(latent.view());
        let reconstruction = self.decoder[1].apply(relu(&decoder_pre).view());
        let classifier_pre = self.classifier[0].apply(latent.view());
        let logits = self.classifier[1].apply(relu(&classifier_pre).view());
        Ok(Forward {
            logits,
            reconstruction,
            latent,
            input: x.to_owned(),
            encoder_pre,
            encoder_out,
            masks,
            decoder_pre,
            classifier_pre,
        })
    }

    /// Gradients of a loss given its derivatives with respect to the logits
    /// and the reconstruction. Modules not listed in `trainable` get zero
    /// gradients, and the encoder is skipped when it is frozen.
    pub fn backward(&self, fwd: &Forward, d_logits: &Array2<f64>, d_recon: &Array2<f64>, trainable: &[Module]) -> MultiTaskModel {
        let mut grads = self.zeros_like();
        let on = |m: Module| trainable.contains(&m);
        let dense_grad = |g: &mut Dense, input: ArrayView2<'_, f64>, d_out: &Array2<f64>| {
            g.w = input.t().dot(d_out);
            g.b = d_out.sum_axis(Axis(0));
        };
        let mut d_latent = Array2::zeros(fwd.latent.raw_dim());
        // classification head
        let c_hidden = relu(&fwd.classifier_pre);
        if on(Module::Classifier) {
            dense_grad(&mut grads.classifier[1], c_hidden.view(), d_logits);
        }
        let d_ch = relu_back(d_logits.dot(&self.classifier[1].w.t()), &fwd.classifier_pre);
        if on(Module::Classifier) {
            dense_grad(&mut grads.classifier[0], fwd.latent.view(), &d_ch);
        }
        d_latent += &d_ch.dot(&self.classifier[0].w.t());
        // decoder
        let d_hidden = relu(&fwd.decoder_pre);
        if on(Module::Decoder) {
            dense_grad(&mut grads.decoder[1], d_hidden.view(), d_recon);
        }
        let d_dh = relu_back(d_recon.dot(&self.decoder[1].w.t()), &fwd.decoder_pre);
        if on(Module::Decoder) {
            dense_grad(&mut grads.decoder[0], fwd.latent.view(), &d_dh);
        }
        d_latent += &d_dh.dot(&self.decoder[0].w.t());
        if !on(Module::Encoder) {
            return grads;
        }
        let mut d = d_latent;
        for l in (0..self.encoder.len()).rev() {
            if let Some(m) = &fwd.masks {
                d *= &m[l];
            }
            let dz = relu_back(d, &fwd.encoder_pre[l]);
            let input = if l == 0 { fwd.input.view() } else { fwd.encoder_out[l - 1].view() };
            dense_grad(&mut grads.encoder[l], input, &dz);
            d = dz.dot(&self.encoder[l].w.t());
        }
        grads
    }

    /// Parameters flattened layer by layer (weights row-major, then bias).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.layers() {
            out.extend(layer.w.iter());
            out.extend(layer.b.iter());
        }
        out
    }

    pub fn unflatten(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch { expected: self.param_count(), got: params.len() });
        }
        let mut pos = 0;
        for layer in self.layers_mut() {
            for v in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *v = params[pos];
                pos += 1;
            }
        }
        Ok(())
    }
}
