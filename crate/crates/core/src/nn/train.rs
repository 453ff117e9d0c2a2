//! From-scratch Adam training with the MSLE loss.
//!
//! Gradients are accumulated in a fixed number of chunks that are folded in
//! chunk order, so training is bitwise deterministic for a given seed
//! regardless of the number of worker threads.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::histogram::sparse_features;
use crate::nn::model::{Activation, ArchKind, HistDenseModel};
use crate::seed::child_rng;
use crate::sim::Dataset;

/// Number of gradient accumulation chunks; fixed so the floating-point
/// reduction order does not depend on thread count.
const N_GRAD_CHUNKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Fraction of records held out for validation.
    pub val_fraction: f64,
    /// Gaussian noise added to the training targets (0 disables).
    pub sigma_y: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 12_800,
            epochs: 1200,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            val_fraction: 0.2,
            sigma_y: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("batch size and epochs must be positive".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidConfig("validation fraction must lie in (0, 1)".into()));
        }
        if !(self.adam_beta1 >= 0.0 && self.adam_beta1 < 1.0)
            || !(self.adam_beta2 >= 0.0 && self.adam_beta2 < 1.0)
            || !(self.adam_eps > 0.0)
        {
            return Err(Error::InvalidConfig("invalid Adam moment parameters".into()));
        }
        if self.sigma_y < 0.0 {
            return Err(Error::InvalidConfig("sigma_y must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Per-epoch training and validation loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossHistory {
    /// (epoch, train MSLE, validation MSLE)
    pub rows: Vec<(usize, f64, f64)>,
}

impl LossHistory {
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "epoch,train_msle,val_msle")?;
        for (e, t, v) in &self.rows {
            writeln!(out, "{e},{t},{v}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Mean squared logarithmic error; predictions are floored at zero before
/// the logarithm, targets must be nonnegative.
pub fn msle_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    let mut acc = 0.0;
    for (&p, &t) in pred.iter().zip(target) {
        if t < 0.0 {
            return Err(Error::Domain(format!("MSLE target must be nonnegative, got {t}")));
        }
        let e = t.ln_1p() - p.max(0.0).ln_1p();
        acc += e * e;
    }
    Ok(acc / pred.len() as f64)
}

/// Perturb targets with Gaussian noise of deviation `sigma_y`, clamping the
/// result into the training support box.
pub fn add_target_noise<R: Rng + ?Sized>(
    targets: &mut [Vec<f64>],
    sigma_y: f64,
    support: &[(f64, f64)],
    rng: &mut R,
) {
    if sigma_y <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma_y).expect("sigma_y > 0");
    for t in targets.iter_mut() {
        for (v, &(lo, hi)) in t.iter_mut().zip(support) {
            *v = (*v + normal.sample(rng)).clamp(lo, hi);
        }
    }
}

/// Flat gradient buffer mirroring the layer structure.
#[derive(Debug, Clone)]
struct Grad {
    layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Grad {
    fn zeroed(model: &HistDenseModel) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    fn add(&mut self, other: &Grad) {
        for ((dw, db), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            for (a, b) in dw.iter_mut().zip(ow) {
                *a += b;
            }
            for (a, b) in db.iter_mut().zip(ob) {
                *a += b;
            }
        }
    }
}

struct Workspace {
    zs: Vec<Vec<f64>>,
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(model: &HistDenseModel) -> Self {
        let dims: Vec<usize> = model.layers.iter().map(|l| l.out_dim).collect();
        Self {
            zs: dims.iter().map(|&d| vec![0.0; d]).collect(),
            acts: dims.iter().map(|&d| vec![0.0; d]).collect(),
            deltas: dims.iter().map(|&d| vec![0.0; d]).collect(),
        }
    }
}

fn forward_record(model: &HistDenseModel, feats: &[(u32, f64)], ws: &mut Workspace) {
    for (k, layer) in model.layers.iter().enumerate() {
        let (z_done, z_rest) = ws.zs.split_at_mut(k);
        let z = &mut z_rest[0];
        z.copy_from_slice(&layer.biases);
        if k == 0 {
            for &(bin, count) in feats {
                let row = &layer.weights[bin as usize * layer.out_dim..];
                for (zj, &w) in z.iter_mut().zip(&row[..layer.out_dim]) {
                    *zj += count * w;
                }
            }
        } else {
            let x = &ws.acts[k - 1];
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &layer.weights[i * layer.out_dim..(i + 1) * layer.out_dim];
                for (zj, &w) in z.iter_mut().zip(row) {
                    *zj += xi * w;
                }
            }
        }
        let _ = z_done;
        crate::nn::model::apply_activation(layer.activation, &ws.zs[k], &mut ws.acts[k]);
    }
}

/// Record loss (mean over output entries) with the output delta written into
/// the last workspace delta buffer.
fn record_loss_and_output_delta(
    model: &HistDenseModel,
    target: &[f64],
    ws: &mut Workspace,
) -> f64 {
    let last = model.layers.len() - 1;
    let dim = model.output_dim as f64;
    let mut loss = 0.0;
    for d in 0..model.output_dim {
        let p = ws.acts[last][d];
        let q = p.max(0.0);
        let e = target[d].ln_1p() - q.ln_1p();
        loss += e * e;
        ws.deltas[last][d] = if p > 0.0 { -2.0 * e / (1.0 + q) / dim } else { 0.0 };
    }
    loss / dim
}

fn backward_record(model: &HistDenseModel, feats: &[(u32, f64)], ws: &mut Workspace, grad: &mut Grad) {
    for k in (0..model.layers.len()).rev() {
        let layer = &model.layers[k];
        // Fold the activation derivative into the delta.
        if layer.activation == Activation::Relu {
            for (d, &z) in ws.deltas[k].iter_mut().zip(&ws.zs[k]) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        let (dw, db) = &mut grad.layers[k];
        for (bj, &dj) in db.iter_mut().zip(&ws.deltas[k]) {
            *bj += dj;
        }
        if k == 0 {
            for &(bin, count) in feats {
                let row = &mut dw[bin as usize * layer.out_dim..(bin as usize + 1) * layer.out_dim];
                for (wj, &dj) in row.iter_mut().zip(&ws.deltas[0]) {
                    *wj += count * dj;
                }
            }
        } else {
            let (prev_deltas, cur_deltas) = ws.deltas.split_at_mut(k);
            let delta = &cur_deltas[0];
            let x = &ws.acts[k - 1];
            let out = layer.out_dim;
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &mut dw[i * out..(i + 1) * out];
                for (wj, &dj) in row.iter_mut().zip(delta) {
                    *wj += xi * dj;
                }
            }
            // Propagate to the previous layer; four interleaved partial sums
            // hide the FMA latency of the row dot products (fixed summation
            // order, so still deterministic).
            for (i, dx) in prev_deltas[k - 1].iter_mut().enumerate() {
                let wrow = &layer.weights[i * out..(i + 1) * out];
                let mut acc = [0.0f64; 4];
                let wchunks = wrow.chunks_exact(4);
                let dchunks = delta.chunks_exact(4);
                let (wrem, drem) = (wchunks.remainder(), dchunks.remainder());
                for (wc, dc) in wchunks.zip(dchunks) {
                    acc[0] += wc[0] * dc[0];
                    acc[1] += wc[1] * dc[1];
                    acc[2] += wc[2] * dc[2];
                    acc[3] += wc[3] * dc[3];
                }
                let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
                for (w, d) in wrem.iter().zip(drem) {
                    total += w * d;
                }
                *dx = total;
            }
        }
    }
}

/// Gradient of the batch-mean loss over the indexed records, plus the mean
/// record loss. Deterministic chunked accumulation.
fn batch_gradient(
    model: &HistDenseModel,
    features: &[Vec<(u32, f64)>],
    targets: &[Vec<f64>],
    indices: &[usize],
) -> (Grad, f64) {
    let chunk = indices.len().div_ceil(N_GRAD_CHUNKS);
    let partials: Vec<(Grad, f64)> = indices
        .par_chunks(chunk.max(1))
        .map(|part| {
            let mut ws = Workspace::new(model);
            let mut grad = Grad::zeroed(model);
            let mut loss = 0.0;
            for &idx in part {
                forward_record(model, &features[idx], &mut ws);
                loss += record_loss_and_output_delta(model, &targets[idx], &mut ws);
                backward_record(model, &features[idx], &mut ws, &mut grad);
            }
            (grad, loss)
        })
        .collect();

    let mut grad = Grad::zeroed(model);
    let mut loss = 0.0;
    for (g, l) in &partials {
        grad.add(g);
        loss += l;
    }
    let scale = 1.0 / indices.len() as f64;
    for (dw, db) in &mut grad.layers {
        for v in dw.iter_mut() {
            *v *= scale;
        }
        for v in db.iter_mut() {
            *v *= scale;
        }
    }
    (grad, loss * scale)
}

fn mean_loss(
    model: &HistDenseModel,
    features: &[Vec<(u32, f64)>],
    targets: &[Vec<f64>],
    indices: &[usize],
) -> f64 {
    let chunk = indices.len().div_ceil(N_GRAD_CHUNKS);
    let partials: Vec<f64> = indices
        .par_chunks(chunk.max(1))
        .map(|part| {
            let mut ws = Workspace::new(model);
            let mut loss = 0.0;
            for &idx in part {
                forward_record(model, &features[idx], &mut ws);
                loss += record_loss_and_output_delta(model, &targets[idx], &mut ws);
            }
            loss
        })
        .collect();
    partials.iter().sum::<f64>() / indices.len() as f64
}

struct Adam {
    m: Grad,
    v: Grad,
    t: u64,
}

impl Adam {
    fn new(model: &HistDenseModel) -> Self {
        Self { m: Grad::zeroed(model), v: Grad::zeroed(model), t: 0 }
    }

    fn step(&mut self, model: &mut HistDenseModel, grad: &Grad, cfg: &TrainConfig) {
        self.t += 1;
        let b1 = cfg.adam_beta1;
        let b2 = cfg.adam_beta2;
        let corr1 = 1.0 - b1.powi(self.t as i32);
        let corr2 = 1.0 - b2.powi(self.t as i32);
        for (k, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = &grad.layers[k];
            let (mw, mb) = &mut self.m.layers[k];
            let (vw, vb) = &mut self.v.layers[k];
            for i in 0..layer.weights.len() {
                let g = gw[i];
                mw[i] = b1 * mw[i] + (1.0 - b1) * g;
                vw[i] = b2 * vw[i] + (1.0 - b2) * g * g;
                layer.weights[i] -=
                    cfg.learning_rate * (mw[i] / corr1) / ((vw[i] / corr2).sqrt() + cfg.adam_eps);
            }
            for i in 0..layer.biases.len() {
                let g = gb[i];
                mb[i] = b1 * mb[i] + (1.0 - b1) * g;
                vb[i] = b2 * vb[i] + (1.0 - b2) * g * g;
                layer.biases[i] -=
                    cfg.learning_rate * (mb[i] / corr1) / ((vb[i] / corr2).sqrt() + cfg.adam_eps);
            }
        }
    }
}

/// Train a histogram-dense model on a dataset.
///
/// The dataset truths become the regression targets (optionally perturbed by
/// `sigma_y` noise, clamped to the support box). Records are split once into
/// train/validation parts, then mini-batches are drawn by epoch-wise
/// reshuffling under the seeded generator. Returns the final-epoch model
/// (weights quantized to `f32` precision) and the loss history.
pub fn train(
    dataset: &Dataset,
    config: &TrainConfig,
    arch: ArchKind,
) -> Result<(HistDenseModel, LossHistory)> {
    config.validate()?;
    if dataset.meta.bounds.n_params() != arch.output_dim() {
        return Err(Error::InvalidConfig(format!(
            "{}D dataset cannot train a {}-output architecture",
            dataset.meta.bounds.n_params(),
            arch.output_dim()
        )));
    }
    let support = dataset.meta.bounds.support();
    let count = dataset.records.len();
    if count < 2 {
        return Err(Error::InvalidConfig("need at least 2 records".into()));
    }

    let mut model = HistDenseModel::new(
        arch,
        crate::nn::HistogramSpec::default(),
        dataset.meta.n_clicks,
        support.clone(),
        config.seed,
    )?;

    // Featurize once; jitter noise lives in the dataset itself.
    let features: Vec<Vec<(u32, f64)>> = dataset
        .records
        .par_iter()
        .map(|r| sparse_features(&r.delays, &model.hist))
        .collect();

    let mut targets: Vec<Vec<f64>> = dataset
        .records
        .iter()
        .map(|r| {
            let truth = r
                .truth
                .ok_or_else(|| Error::InvalidConfig("training records need ground truth".into()))?;
            Ok(match arch {
                ArchKind::OneD => vec![truth.delta],
                ArchKind::TwoD => vec![truth.delta, truth.omega],
            })
        })
        .collect::<Result<_>>()?;
    for t in &targets {
        for (v, &(lo, hi)) in t.iter().zip(&support) {
            if *v < lo || *v > hi {
                return Err(Error::InvalidConfig(format!(
                    "target {v} outside the support box [{lo}, {hi}]"
                )));
            }
        }
    }
    add_target_noise(&mut targets, config.sigma_y, &support, &mut child_rng(config.seed, 1));

    // One shuffled split, then per-epoch reshuffling of the training part.
    let mut indices: Vec<usize> = (0..count).collect();
    indices.shuffle(&mut child_rng(config.seed, 2));
    let n_val = ((count as f64 * config.val_fraction).round() as usize).clamp(1, count - 1);
    let n_train = count - n_val;
    if config.batch_size > n_train {
        return Err(Error::InvalidConfig(format!(
            "batch size {} exceeds the training split of {n_train} records",
            config.batch_size
        )));
    }
    let (train_idx, val_idx) = indices.split_at(n_train);
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(&model);
    let mut epoch_rng = child_rng(config.seed, 3);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        train_idx.shuffle(&mut epoch_rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in train_idx.chunks(config.batch_size) {
            let (grad, batch_loss) = batch_gradient(&model, &features, &targets, batch);
            adam.step(&mut model, &grad, config);
            loss_sum += batch_loss * batch.len() as f64;
            seen += batch.len();
        }
        let train_msle = loss_sum / seen as f64;
        if !train_msle.is_finite() {
            return Err(Error::TrainingDiverged(epoch));
        }
        let val_msle = mean_loss(&model, &features, &targets, val_idx);
        history.push((epoch, train_msle, val_msle));
    }

    model.quantize_f32();
    Ok((model, LossHistory { rows: history }))
}

/// Maximum relative deviation between back-propagated gradients and central
/// finite differences over randomly chosen live weight coordinates.
///
/// Coordinates whose analytic and numeric gradients are both below 1e-7 are
/// skipped (dead ReLU paths carry no signal to compare).
pub fn max_gradcheck_error(
    model: &HistDenseModel,
    features: &[Vec<(u32, f64)>],
    targets: &[Vec<f64>],
    n_coords: usize,
    seed: u64,
) -> Result<f64> {
    if features.is_empty() || features.len() != targets.len() {
        return Err(Error::ShapeMismatch("need matching features and targets".into()));
    }
    let indices: Vec<usize> = (0..features.len()).collect();
    let (grad, _) = batch_gradient(model, features, targets, &indices);

    let mut rng = child_rng(seed, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < n_coords && attempts < 100 * n_coords {
        attempts += 1;
        let layer = rng.random_range(0..model.layers.len());
        let n_w = model.layers[layer].weights.len();
        let n_b = model.layers[layer].biases.len();
        let coord = rng.random_range(0..n_w + n_b);
        let analytic = if coord < n_w {
            grad.layers[layer].0[coord]
        } else {
            grad.layers[layer].1[coord - n_w]
        };

        let mut probe = model.clone();
        let value = if coord < n_w {
            probe.layers[layer].weights[coord]
        } else {
            probe.layers[layer].biases[coord - n_w]
        };
        let h = 1e-4 * value.abs().max(0.1);
        let eval = |v: f64, probe: &mut HistDenseModel| -> f64 {
            if coord < n_w {
                probe.layers[layer].weights[coord] = v;
            } else {
                probe.layers[layer].biases[coord - n_w] = v;
            }
            mean_loss(probe, features, targets, &indices)
        };
        let lp = eval(value + h, &mut probe);
        let lm = eval(value - h, &mut probe);
        let fd = (lp - lm) / (2.0 * h);
        let scale = analytic.abs().max(fd.abs());
        if scale < 1e-7 {
            continue;
        }
        worst = worst.max((fd - analytic).abs() / scale);
        checked += 1;
    }
    if checked < n_coords {
        return Err(Error::InsufficientSamples(format!(
            "found only {checked} live coordinates out of {n_coords} requested"
        )));
    }
    Ok(worst)
}
