//! Network definition and the forward pass.

use rand::Rng;

use crate::bayes::{Estimate, EstimatorKind};
use crate::error::{Error, Result};
use crate::nn::histogram::{sparse_features, HistogramSpec};
use crate::seed::child_rng;
use crate::sim::DelayRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

/// Fully connected layer; weights are row-major `[in_dim][out_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl DenseLayer {
    fn zeroed(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self { weights: vec![0.0; in_dim * out_dim], biases: vec![0.0; out_dim], in_dim, out_dim, activation }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

pub(crate) fn apply_activation(act: Activation, z: &[f64], a: &mut [f64]) {
    match act {
        Activation::Relu => {
            for (ai, &zi) in a.iter_mut().zip(z) {
                *ai = zi.max(0.0);
            }
        }
        Activation::Linear => a.copy_from_slice(z),
    }
}

/// Network architecture: detuning only, or joint detuning/Rabi.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchKind {
    OneD,
    TwoD,
}

impl ArchKind {
    /// Layer widths from the histogram features to the output.
    pub fn layer_dims(&self, n_bins: usize) -> Vec<usize> {
        match self {
            ArchKind::OneD => vec![n_bins, 100, 50, 30, 1],
            ArchKind::TwoD => vec![n_bins, 100, 50, 30, 20, 10, 2],
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            ArchKind::OneD => 1,
            ArchKind::TwoD => 2,
        }
    }
}

pub(crate) const INIT_TAG: &str = "glorot-uniform-v1";

/// Histogram featurizer plus dense stack, with the training support box used
/// to clamp estimates at inference time.
///
/// Weights are held as `f64` for exact gradient arithmetic but are always
/// quantized to `f32`-representable values (at initialization and after
/// training), so the `f32` on-disk format round-trips bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct HistDenseModel {
    pub hist: HistogramSpec,
    pub layers: Vec<DenseLayer>,
    pub output_dim: usize,
    pub n_clicks: usize,
    pub support: Vec<(f64, f64)>,
    pub init_tag: String,
}

impl HistDenseModel {
    /// Fan-in/fan-out uniform initialization under the seeded generator.
    pub fn new(
        arch: ArchKind,
        hist: HistogramSpec,
        n_clicks: usize,
        support: Vec<(f64, f64)>,
        seed: u64,
    ) -> Result<Self> {
        let mut model = Self::zeroed(arch, hist, n_clicks, support)?;
        let mut rng = child_rng(seed, 0);
        for layer in &mut model.layers {
            let limit = (6.0 / (layer.in_dim + layer.out_dim) as f64).sqrt();
            for w in &mut layer.weights {
                let draw = limit * (2.0 * rng.random::<f64>() - 1.0);
                *w = (draw as f32) as f64;
            }
        }
        Ok(model)
    }

    /// All-zero weights and biases (edge-case and test construction).
    pub fn zeroed(
        arch: ArchKind,
        hist: HistogramSpec,
        n_clicks: usize,
        support: Vec<(f64, f64)>,
    ) -> Result<Self> {
        hist.validate()?;
        if support.len() != arch.output_dim() {
            return Err(Error::ShapeMismatch(format!(
                "support box has {} axes, architecture outputs {}",
                support.len(),
                arch.output_dim()
            )));
        }
        for &(lo, hi) in &support {
            if !(lo < hi) {
                return Err(Error::InvalidConfig(format!("support interval [{lo}, {hi}]")));
            }
        }
        let dims = arch.layer_dims(hist.n_bins);
        let layers: Vec<DenseLayer> = dims
            .windows(2)
            .enumerate()
            .map(|(k, d)| {
                let act = if k + 2 == dims.len() { Activation::Linear } else { Activation::Relu };
                DenseLayer::zeroed(d[0], d[1], act)
            })
            .collect();
        Ok(Self {
            hist,
            layers,
            output_dim: arch.output_dim(),
            n_clicks,
            support,
            init_tag: INIT_TAG.to_string(),
        })
    }

    pub fn arch(&self) -> ArchKind {
        if self.output_dim == 1 {
            ArchKind::OneD
        } else {
            ArchKind::TwoD
        }
    }

    /// Trainable parameter count.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Round every parameter to its nearest `f32`.
    pub(crate) fn quantize_f32(&mut self) {
        for layer in &mut self.layers {
            for w in &mut layer.weights {
                *w = (*w as f32) as f64;
            }
            for b in &mut layer.biases {
                *b = (*b as f32) as f64;
            }
        }
    }

    /// Raw network outputs for sparse histogram features (no clamping).
    pub(crate) fn forward_sparse(&self, feats: &[(u32, f64)]) -> Vec<f64> {
        let mut a: Vec<f64> = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.biases.clone();
            if k == 0 {
                for &(bin, count) in feats {
                    let row = &layer.weights[bin as usize * layer.out_dim..];
                    for (zj, &w) in z.iter_mut().zip(&row[..layer.out_dim]) {
                        *zj += count * w;
                    }
                }
            } else {
                for (i, &xi) in a.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[i * layer.out_dim..(i + 1) * layer.out_dim];
                    for (zj, &w) in z.iter_mut().zip(row) {
                        *zj += xi * w;
                    }
                }
            }
            let mut out = vec![0.0; layer.out_dim];
            apply_activation(layer.activation, &z, &mut out);
            a = out;
        }
        a
    }

    /// Estimate the parameters of a record: histogram, dense stack, then
    /// clamping into the training support box.
    pub fn forward(&self, record: &DelayRecord) -> Result<Estimate> {
        if record.delays.len() != self.n_clicks {
            return Err(Error::ShapeMismatch(format!(
                "record has {} delays, model was trained on {}",
                record.delays.len(),
                self.n_clicks
            )));
        }
        let feats = sparse_features(&record.delays, &self.hist);
        let mut values = self.forward_sparse(&feats);
        for (v, &(lo, hi)) in values.iter_mut().zip(&self.support) {
            *v = v.clamp(lo, hi);
        }
        Ok(Estimate { values, method: EstimatorKind::Nn })
    }
}
