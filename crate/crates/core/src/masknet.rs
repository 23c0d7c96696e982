//! Stage 1: per-pixel robot-body classification.
//!
//! A stack of dilated 3×3 convolutions keeps the output at input resolution
//! while growing the receptive field; the loss is a cross entropy weighted by
//! inverse class probabilities so the small foreground cannot be ignored.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{LayerSpec, Network, Padding, Real, Schedule, SgdMomentum, Tensor};
use crate::scene::dataset::LoadedSample;
use crate::scene::image::{ColorImage, MaskImage};

/// Clamp bound for measured class probabilities.
pub const WEIGHT_CLAMP: f64 = 1e-4;

/// Default probability clip inside the log.
pub const CLIP_EPS: f64 = 1e-7;

/// Inverse-probability class weights measured from one ground-truth mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w_fg: f64,
    pub w_bg: f64,
}

/// `w_fg = 1/P(fg)`, `w_bg = 1/P(bg)`, with the measured foreground fraction
/// clamped to `[1e-4, 1 − 1e-4]` so degenerate masks stay finite.
pub fn class_weights(mask: &MaskImage) -> ClassWeights {
    let p_fg = mask.foreground_fraction().clamp(WEIGHT_CLAMP, 1.0 - WEIGHT_CLAMP);
    ClassWeights { w_fg: 1.0 / p_fg, w_bg: 1.0 / (1.0 - p_fg) }
}

/// Weighted binary cross entropy, normalized by the pixel count:
/// `(1/N)·Σ −w_fg·gt·log(est_c) − w_bg·(1−gt)·log(1−est_c)` where
/// `est_c = clip(est, ε, 1−ε)`.
pub fn seg_loss<T: Real>(
    est: &Tensor<T>,
    gt: &Tensor<T>,
    w: &ClassWeights,
    clip_eps: f64,
) -> Result<T> {
    Ok(seg_loss_grad(est, gt, w, clip_eps)?.0)
}

/// Loss plus its gradient with respect to `est`. The gradient is zero where
/// the clip is active.
pub fn seg_loss_grad<T: Real>(
    est: &Tensor<T>,
    gt: &Tensor<T>,
    w: &ClassWeights,
    clip_eps: f64,
) -> Result<(T, Tensor<T>)> {
    if est.shape() != gt.shape() {
        return Err(Error::ShapeMismatch(format!(
            "estimate {:?} vs ground truth {:?}",
            est.shape(),
            gt.shape()
        )));
    }
    let n = est.numel();
    let inv_n = T::from_f64(1.0 / n as f64);
    let (w_fg, w_bg) = (T::from_f64(w.w_fg), T::from_f64(w.w_bg));
    let (lo, hi) = (T::from_f64(clip_eps), T::from_f64(1.0 - clip_eps));
    let mut loss = T::zero();
    let mut grad = Tensor::zeros(est.shape());
    for ((&p, &t), g) in est.data().iter().zip(gt.data()).zip(grad.data_mut()) {
        let clipped = p < lo || p > hi;
        let pc = num_traits::clamp(p, lo, hi);
        loss += -(w_fg * t * pc.ln() + w_bg * (T::one() - t) * (T::one() - pc).ln());
        if !clipped {
            *g = (-w_fg * t / pc + w_bg * (T::one() - t) / (T::one() - pc)) * inv_n;
        }
    }
    Ok((loss * inv_n, grad))
}

/// The published form of the per-pixel loss with estimate and ground truth
/// swapped around the log (the ground truth is clipped inside it). Constant
/// in the estimate at binary ground truth, so it cannot train a network;
/// kept for loss reporting and comparison only.
pub fn seg_loss_literal<T: Real>(
    est: &Tensor<T>,
    gt: &Tensor<T>,
    w: &ClassWeights,
    clip_eps: f64,
) -> Result<T> {
    if est.shape() != gt.shape() {
        return Err(Error::ShapeMismatch("literal loss shapes".into()));
    }
    let n = est.numel();
    let (w_fg, w_bg) = (T::from_f64(w.w_fg), T::from_f64(w.w_bg));
    let (lo, hi) = (T::from_f64(clip_eps), T::from_f64(1.0 - clip_eps));
    let mut loss = T::zero();
    for (&p, &t) in est.data().iter().zip(gt.data()) {
        let tc = num_traits::clamp(t, lo, hi);
        loss += -(w_fg * p * tc.ln() + w_bg * (T::one() - p) * (T::one() - tc).ln());
    }
    Ok(loss / T::from_f64(n as f64))
}

/// Architecture and training profile of the mask network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskNetConfig {
    pub input_width: usize,
    pub input_height: usize,
    /// Filters in each hidden convolution.
    pub filters: usize,
    /// Dilation per hidden convolution; the 1-filter output conv follows.
    pub dilations: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub clip_eps: f64,
    /// Also evaluate the published literal loss form each epoch.
    pub report_literal_loss: bool,
}

impl MaskNetConfig {
    /// Reduced profile: quarter-resolution inputs, short schedule. The rate
    /// endpoints are hotter than the published ones; at ~1.5k optimizer steps
    /// the published schedule leaves the network undertrained.
    pub fn desk() -> Self {
        Self {
            input_width: 64,
            input_height: 53,
            filters: 32,
            dilations: vec![1, 2, 4, 8],
            epochs: 200,
            batch_size: 32,
            lr_start: 1e-2,
            lr_end: 1e-4,
            momentum: 0.9,
            clip_eps: CLIP_EPS,
            report_literal_loss: false,
        }
    }

    /// Published profile: half-resolution inputs, long schedule.
    pub fn full() -> Self {
        Self {
            input_width: 256,
            input_height: 212,
            epochs: 5000,
            batch_size: 128,
            lr_start: 1e-3,
            lr_end: 1e-6,
            ..Self::desk()
        }
    }

    pub fn input_shape(&self) -> Vec<usize> {
        vec![3, self.input_height, self.input_width]
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut specs = Vec::new();
        let mut in_c = 3;
        for &d in &self.dilations {
            specs.push(LayerSpec::Conv2d {
                in_channels: in_c,
                out_channels: self.filters,
                kernel: 3,
                dilation: d,
                stride: 1,
                padding: Padding::Same,
            });
            specs.push(LayerSpec::Relu);
            in_c = self.filters;
        }
        specs.push(LayerSpec::Conv2d {
            in_channels: in_c,
            out_channels: 1,
            kernel: 3,
            dilation: 1,
            stride: 1,
            padding: Padding::Same,
        });
        specs.push(LayerSpec::Sigmoid);
        specs
    }

    pub fn lr_schedule(&self) -> Schedule {
        Schedule::exponential(self.lr_start, self.lr_end, self.epochs)
    }
}

/// One row of the training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub lr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub curve: Vec<EpochStats>,
}

impl TrainReport {
    /// CSV with one row per epoch. Momentum / literal-loss columns appear
    /// only when present.
    pub fn to_csv(&self) -> String {
        let with_momentum = self.curve.iter().any(|e| e.momentum.is_some());
        let with_literal = self.curve.iter().any(|e| e.literal_loss.is_some());
        let mut out = String::from("epoch,mean_loss,lr");
        if with_momentum {
            out.push_str(",momentum");
        }
        if with_literal {
            out.push_str(",literal_loss");
        }
        out.push('\n');
        for e in &self.curve {
            out.push_str(&format!("{},{},{}", e.epoch, e.mean_loss, e.lr));
            if with_momentum {
                out.push_str(&format!(",{}", e.momentum.unwrap_or(f64::NAN)));
            }
            if with_literal {
                out.push_str(&format!(",{}", e.literal_loss.unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

/// Convert an image to a planar C×H×W tensor.
pub fn color_to_tensor<T: Real>(img: &ColorImage) -> Tensor<T> {
    let (w, h) = (img.width, img.height);
    let mut data = vec![T::zero(); 3 * h * w];
    for y in 0..h {
        for x in 0..w {
            let px = img.pixel(x, y);
            for c in 0..3 {
                data[(c * h + y) * w + x] = T::from_f64(px[c] as f64);
            }
        }
    }
    Tensor::new(vec![3, h, w], data)
}

pub fn mask_to_tensor<T: Real>(mask: &MaskImage) -> Tensor<T> {
    let data = mask.data.iter().map(|&v| T::from_f64(v as f64)).collect();
    Tensor::new(vec![1, mask.height, mask.width], data)
}

/// Preprocessed training example.
struct MaskExample {
    input: Tensor<f32>,
    gt: Tensor<f32>,
    weights: ClassWeights,
}

fn prepare_examples(samples: &[LoadedSample], config: &MaskNetConfig) -> Vec<MaskExample> {
    samples
        .par_iter()
        .map(|s| {
            let color = s.color.resize(config.input_width, config.input_height);
            let mask = s.mask.resize(config.input_width, config.input_height);
            MaskExample {
                input: color_to_tensor(&color),
                gt: mask_to_tensor(&mask),
                weights: class_weights(&mask),
            }
        })
        .collect()
}

/// Train the mask network. Deterministic in `(samples, config, seed)`.
pub fn train_masknet(
    samples: &[LoadedSample],
    config: &MaskNetConfig,
    seed: u64,
) -> Result<(Network<f32>, TrainReport)> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset("mask training split".into()));
    }
    let examples = prepare_examples(samples, config);
    let mut net = Network::<f32>::from_specs(&config.input_shape(), &config.layer_specs(), seed)?;
    let mut opt = SgdMomentum::new(&net, config.lr_start as f32, config.momentum as f32);
    let lr_schedule = config.lr_schedule();

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 0..config.epochs {
        let lr = lr_schedule.value(epoch)?;
        opt.learning_rate = lr as f32;
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0f64;
        let mut epoch_literal = 0.0f64;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            // Per-image losses and gradients in parallel; reduction stays in
            // batch order for determinism.
            let results: Vec<Result<(f32, crate::nn::Gradients<f32>)>> = batch
                .par_iter()
                .map(|&i| {
                    let ex = &examples[i];
                    let trace = net.forward_trace(&ex.input)?;
                    let (loss, grad_out) =
                        seg_loss_grad(trace.output(), &ex.gt, &ex.weights, config.clip_eps)?;
                    let grads = net.backward(&trace, &grad_out)?;
                    Ok((loss, grads))
                })
                .collect();

            let mut batch_grads = net.zero_gradients();
            let mut batch_loss = 0.0f64;
            for r in results {
                let (loss, grads) = r?;
                batch_loss += loss as f64;
                batch_grads.add_assign(&grads);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_idx });
            }
            epoch_loss += batch_loss;
            batch_grads.scale_in_place(1.0 / batch.len() as f32);
            opt.step(&mut net.params_mut(), &batch_grads.param_grads());
        }

        if config.report_literal_loss {
            for ex in &examples {
                let out = net.forward(&ex.input)?;
                epoch_literal +=
                    seg_loss_literal(&out, &ex.gt, &ex.weights, config.clip_eps)? as f64;
            }
        }

        report.curve.push(EpochStats {
            epoch,
            mean_loss: epoch_loss / examples.len() as f64,
            lr,
            momentum: None,
            literal_loss: config
                .report_literal_loss
                .then_some(epoch_literal / examples.len() as f64),
        });
    }
    Ok((net, report))
}

/// Per-pixel foreground probabilities for one color image. The image is
/// resized to the network's input resolution first.
pub fn predict_mask(net: &Network<f32>, color: &ColorImage) -> Result<Tensor<f32>> {
    let shape = net.input_shape().to_vec();
    let (h, w) = (shape[1], shape[2]);
    let resized = color.resize(w, h);
    net.forward(&color_to_tensor(&resized))
}

/// Threshold a probability image into a mask: `pixel ≥ threshold → 1`.
pub fn binarize_mask(prob: &Tensor<f32>, threshold: f32) -> MaskImage {
    let shape = prob.shape();
    let (h, w) = (shape[shape.len() - 2], shape[shape.len() - 1]);
    let mut mask = MaskImage::new(w, h);
    for (slot, &p) in mask.data.iter_mut().zip(prob.data()) {
        *slot = u8::from(p >= threshold);
    }
    mask
}

/// Percentage of pixels on which the two masks agree.
pub fn mask_accuracy(pred: &MaskImage, gt: &MaskImage) -> Result<f64> {
    if pred.width != gt.width || pred.height != gt.height {
        return Err(Error::ShapeMismatch(format!(
            "mask {}×{} vs {}×{}",
            pred.width, pred.height, gt.width, gt.height
        )));
    }
    let matching = pred.data.iter().zip(&gt.data).filter(|(a, b)| a == b).count();
    Ok(100.0 * matching as f64 / pred.data.len() as f64)
}
