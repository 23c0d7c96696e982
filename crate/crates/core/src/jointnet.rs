//! Stage 2: regression of camera-frame 3D joint coordinates from a masked
//! color image.
//!
//! Three dilated convolutions (32, 64, 128 filters) with two max-pool stages
//! feed a single dense layer with linear output. Targets are normalized
//! per dataset (per-axis mean/scale, recorded in the checkpoint) and every
//! reported error is in denormalized meters.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masknet::{color_to_tensor, EpochStats, TrainReport};
use crate::nn::{
    LayerSpec, Network, Padding, Real, Schedule, SgdMomentum, TargetNormalization, Tensor,
};
use crate::scene::dataset::LoadedSample;
use crate::scene::image::{ColorImage, MaskImage};

/// Which 3D points the network regresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPoints {
    /// All joint origins plus the end-effector (the full kinematics output).
    JointsAndEndEffector,
    /// Joint origins only.
    JointsOnly,
}

impl TargetPoints {
    /// Slice a label's point list down to the regressed subset.
    pub fn select(self, points: &[[f64; 3]]) -> Vec<[f64; 3]> {
        match self {
            TargetPoints::JointsAndEndEffector => points.to_vec(),
            TargetPoints::JointsOnly => points[..points.len() - 1].to_vec(),
        }
    }
}

/// A set of K camera-frame 3D points, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEstimate {
    pub points: Vec<[f64; 3]>,
}

impl JointEstimate {
    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }
}

/// Mean over points of the per-point Euclidean norm `(1/K)·Σ ‖J_i − E_i‖₂`.
pub fn joint_loss<T: Real>(est: &Tensor<T>, gt: &Tensor<T>) -> Result<T> {
    Ok(joint_loss_grad(est, gt)?.0)
}

/// Loss plus gradient w.r.t. `est`. Tensors are flat `[3K]`, point-major
/// `(x0, y0, z0, x1, …)`. The gradient of the norm at an exactly matching
/// point is taken as zero.
pub fn joint_loss_grad<T: Real>(est: &Tensor<T>, gt: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    if est.shape() != gt.shape() || est.numel() % 3 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "joint estimates {:?} vs {:?} (need matching [3K])",
            est.shape(),
            gt.shape()
        )));
    }
    let k = est.numel() / 3;
    let inv_k = T::from_f64(1.0 / k as f64);
    let mut loss = T::zero();
    let mut grad = Tensor::zeros(est.shape());
    for i in 0..k {
        let e = &est.data()[3 * i..3 * i + 3];
        let t = &gt.data()[3 * i..3 * i + 3];
        let d = [e[0] - t[0], e[1] - t[1], e[2] - t[2]];
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        loss += norm;
        if norm > T::from_f64(1e-12) {
            let s = inv_k / norm;
            for a in 0..3 {
                grad.data_mut()[3 * i + a] = d[a] * s;
            }
        }
    }
    Ok((loss * inv_k, grad))
}

/// Mean Euclidean error in meters plus the per-point breakdown.
pub fn joint_error(est: &JointEstimate, gt: &JointEstimate) -> Result<(f64, Vec<f64>)> {
    if est.k() != gt.k() {
        return Err(Error::ShapeMismatch(format!("K mismatch: {} vs {}", est.k(), gt.k())));
    }
    let per_point: Vec<f64> = est
        .points
        .iter()
        .zip(&gt.points)
        .map(|(e, g)| {
            ((e[0] - g[0]).powi(2) + (e[1] - g[1]).powi(2) + (e[2] - g[2]).powi(2)).sqrt()
        })
        .collect();
    let mean = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok((mean, per_point))
}

/// Zero background pixels, keep foreground: per-pixel multiply of the color
/// image by the binary mask.
pub fn overlay(color: &ColorImage, mask: &MaskImage) -> Result<ColorImage> {
    if color.width != mask.width || color.height != mask.height {
        return Err(Error::ShapeMismatch(format!(
            "overlay {}×{} vs mask {}×{}",
            color.width, color.height, mask.width, mask.height
        )));
    }
    let mut out = color.clone();
    for (px, &m) in out.data.chunks_exact_mut(3).zip(&mask.data) {
        if m == 0 {
            px.fill(0.0);
        }
    }
    Ok(out)
}

/// Soft variant: multiply by per-pixel probabilities instead of thresholding.
pub fn overlay_soft(color: &ColorImage, prob: &Tensor<f32>) -> Result<ColorImage> {
    let shape = prob.shape();
    let (h, w) = (shape[shape.len() - 2], shape[shape.len() - 1]);
    if color.width != w || color.height != h {
        return Err(Error::ShapeMismatch("soft overlay dimensions".into()));
    }
    let mut out = color.clone();
    for (px, &p) in out.data.chunks_exact_mut(3).zip(prob.data()) {
        for v in px.iter_mut() {
            *v *= p;
        }
    }
    Ok(out)
}

/// Architecture and training profile of the coordinate network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointNetConfig {
    pub input_width: usize,
    pub input_height: usize,
    /// Filters of the three convolutions.
    pub filters: [usize; 3],
    /// Dilation of each convolution.
    pub dilations: [usize; 3],
    pub targets: TargetPoints,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum_start: f64,
    pub momentum_end: f64,
}

impl JointNetConfig {
    pub fn desk() -> Self {
        Self {
            input_width: 64,
            input_height: 53,
            filters: [32, 64, 128],
            dilations: [1, 2, 4],
            targets: TargetPoints::JointsAndEndEffector,
            epochs: 200,
            batch_size: 32,
            lr_start: 0.03,
            lr_end: 1e-4,
            momentum_start: 0.9,
            momentum_end: 0.999,
        }
    }

    pub fn full() -> Self {
        Self {
            input_width: 256,
            input_height: 212,
            epochs: 5000,
            batch_size: 128,
            ..Self::desk()
        }
    }

    pub fn input_shape(&self) -> Vec<usize> {
        vec![3, self.input_height, self.input_width]
    }

    /// Conv → pool → conv → pool → conv → dense(3K).
    pub fn layer_specs(&self, k_points: usize) -> Vec<LayerSpec> {
        let conv = |in_c: usize, out_c: usize, d: usize| LayerSpec::Conv2d {
            in_channels: in_c,
            out_channels: out_c,
            kernel: 3,
            dilation: d,
            stride: 1,
            padding: Padding::Same,
        };
        let (h, w) = (self.input_height, self.input_width);
        let (h2, w2) = ((h - 2) / 2 + 1, (w - 2) / 2 + 1);
        let (h4, w4) = ((h2 - 2) / 2 + 1, (w2 - 2) / 2 + 1);
        vec![
            conv(3, self.filters[0], self.dilations[0]),
            LayerSpec::Relu,
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            conv(self.filters[0], self.filters[1], self.dilations[1]),
            LayerSpec::Relu,
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            conv(self.filters[1], self.filters[2], self.dilations[2]),
            LayerSpec::Relu,
            LayerSpec::Dense { in_size: self.filters[2] * h4 * w4, out_size: 3 * k_points },
        ]
    }

    pub fn lr_schedule(&self) -> Schedule {
        Schedule::exponential(self.lr_start, self.lr_end, self.epochs)
    }

    pub fn momentum_schedule(&self) -> Schedule {
        Schedule::linear(self.momentum_start, self.momentum_end, self.epochs)
    }
}

/// Per-axis mean and standard deviation of the target points (scale floored
/// at 1e-6).
pub fn fit_normalization(targets: &[Vec<[f64; 3]>]) -> TargetNormalization {
    let mut mean = [0.0f64; 3];
    let mut count = 0usize;
    for sample in targets {
        for p in sample {
            for a in 0..3 {
                mean[a] += p[a];
            }
            count += 1;
        }
    }
    for m in &mut mean {
        *m /= count.max(1) as f64;
    }
    let mut var = [0.0f64; 3];
    for sample in targets {
        for p in sample {
            for a in 0..3 {
                var[a] += (p[a] - mean[a]).powi(2);
            }
        }
    }
    let mut scale = [1.0f64; 3];
    for a in 0..3 {
        scale[a] = (var[a] / count.max(1) as f64).sqrt().max(1e-6);
    }
    TargetNormalization { mean, scale }
}

fn points_to_tensor<T: Real>(points: &[[f64; 3]], norm: &TargetNormalization) -> Tensor<T> {
    let mut data = Vec::with_capacity(points.len() * 3);
    for p in points {
        let q = norm.normalize(*p);
        data.extend(q.iter().map(|&v| T::from_f64(v)));
    }
    Tensor::new(vec![points.len() * 3], data)
}

struct JointExample {
    input: Tensor<f32>,
    target: Tensor<f32>,
}

/// Build the stage-2 training input for one sample: ground-truth-mask
/// overlay at network resolution.
pub fn training_overlay(
    sample: &LoadedSample,
    width: usize,
    height: usize,
) -> Result<ColorImage> {
    let color = sample.color.resize(width, height);
    let mask = sample.mask.resize(width, height);
    overlay(&color, &mask)
}

/// Train the coordinate network on ground-truth-mask overlays; stage 2 never
/// depends on stage-1 quality during training. Returns the network, the
/// recorded target normalization and the loss curve (normalized units).
pub fn train_jointnet(
    samples: &[LoadedSample],
    config: &JointNetConfig,
    seed: u64,
) -> Result<(Network<f32>, TargetNormalization, TrainReport)> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset("joint training split".into()));
    }
    let target_sets: Vec<Vec<[f64; 3]>> =
        samples.iter().map(|s| config.targets.select(&s.label.joints_cam)).collect();
    let k = target_sets[0].len();
    if target_sets.iter().any(|t| t.len() != k) {
        return Err(Error::ShapeMismatch("inconsistent joint counts across samples".into()));
    }
    let norm = fit_normalization(&target_sets);

    let examples: Vec<JointExample> = samples
        .par_iter()
        .zip(&target_sets)
        .map(|(s, targets)| {
            let input = training_overlay(s, config.input_width, config.input_height)?;
            Ok(JointExample {
                input: color_to_tensor(&input),
                target: points_to_tensor(targets, &norm),
            })
        })
        .collect::<Result<_>>()?;

    let mut net = Network::<f32>::from_specs(&config.input_shape(), &config.layer_specs(k), seed)?;
    let mut opt = SgdMomentum::new(&net, config.lr_start as f32, config.momentum_start as f32);
    let lr_schedule = config.lr_schedule();
    let momentum_schedule = config.momentum_schedule();

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517c);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 0..config.epochs {
        let lr = lr_schedule.value(epoch)?;
        let momentum = momentum_schedule.value(epoch)?;
        opt.learning_rate = lr as f32;
        opt.momentum = momentum as f32;
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0f64;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let results: Vec<Result<(f32, crate::nn::Gradients<f32>)>> = batch
                .par_iter()
                .map(|&i| {
                    let ex = &examples[i];
                    let trace = net.forward_trace(&ex.input)?;
                    let (loss, grad_out) = joint_loss_grad(trace.output(), &ex.target)?;
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

        report.curve.push(EpochStats {
            epoch,
            mean_loss: epoch_loss / examples.len() as f64,
            lr,
            momentum: Some(momentum),
            literal_loss: None,
        });
    }
    Ok((net, norm, report))
}

/// Predict K camera-frame points (meters) from an overlay image.
pub fn predict_joints(
    net: &Network<f32>,
    norm: &TargetNormalization,
    overlay_img: &ColorImage,
) -> Result<JointEstimate> {
    let shape = net.input_shape().to_vec();
    let (h, w) = (shape[1], shape[2]);
    let resized = overlay_img.resize(w, h);
    let out = net.forward(&color_to_tensor(&resized))?;
    if out.numel() % 3 != 0 {
        return Err(Error::Checkpoint(format!("output length {} is not 3K", out.numel())));
    }
    let points = out
        .data()
        .chunks_exact(3)
        .map(|c| norm.denormalize([c[0] as f64, c[1] as f64, c[2] as f64]))
        .collect();
    Ok(JointEstimate { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_loss_zero_at_equality() {
        let t = Tensor::<f64>::new(vec![6], vec![0.1, 0.2, 0.3, -0.4, 0.5, 0.6]);
        assert_eq!(joint_loss(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn joint_loss_three_four_five() {
        let gt = Tensor::<f64>::new(vec![3], vec![0.0, 0.0, 1.0]);
        let est = Tensor::<f64>::new(vec![3], vec![0.03, 0.0, 1.04]);
        let loss = joint_loss(&est, &gt).unwrap();
        assert!((loss - 0.05).abs() < 1e-9);
    }

    #[test]
    fn joint_loss_averages_norms() {
        let gt = Tensor::<f64>::new(vec![6], vec![0.0; 6]);
        let est = Tensor::<f64>::new(vec![6], vec![0.02, 0.0, 0.0, 0.0, 0.04, 0.0]);
        let loss = joint_loss(&est, &gt).unwrap();
        assert!((loss - 0.03).abs() < 1e-12);
    }

    #[test]
    fn joint_loss_is_symmetric_and_nonnegative() {
        let a = Tensor::<f64>::new(vec![6], vec![0.4, -0.2, 0.9, 0.0, 1.2, -0.7]);
        let b = Tensor::<f64>::new(vec![6], vec![-0.1, 0.3, 0.5, 0.8, -0.2, 0.6]);
        let ab = joint_loss(&a, &b).unwrap();
        let ba = joint_loss(&b, &a).unwrap();
        assert!(ab > 0.0);
        assert!((ab - ba).abs() < 1e-15);
    }

    #[test]
    fn joint_loss_rejects_k_mismatch() {
        let a = Tensor::<f64>::zeros(&[6]);
        let b = Tensor::<f64>::zeros(&[9]);
        assert!(joint_loss(&a, &b).is_err());
    }

    #[test]
    fn joint_loss_gradient_matches_finite_differences() {
        let gt = Tensor::<f64>::new(vec![6], vec![0.1, -0.3, 0.8, 0.5, 0.2, -0.4]);
        let est = Tensor::<f64>::new(vec![6], vec![0.3, 0.1, 0.5, 0.2, -0.1, 0.1]);
        let (_, grad) = joint_loss_grad(&est, &gt).unwrap();
        let eps = 1e-7;
        for i in 0..6 {
            let mut plus = est.clone();
            plus.data_mut()[i] += eps;
            let mut minus = est.clone();
            minus.data_mut()[i] -= eps;
            let numeric =
                (joint_loss(&plus, &gt).unwrap() - joint_loss(&minus, &gt).unwrap()) / (2.0 * eps);
            let a = grad.data()[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "coordinate {i}");
        }
    }

    #[test]
    fn joint_error_translation_equivariance() {
        let gt = JointEstimate {
            points: vec![[0.1, 0.2, 1.0], [0.5, -0.3, 2.0], [-0.2, 0.4, 1.5]],
        };
        let v: [f64; 3] = [0.03, -0.04, 0.12];
        let vn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let est = JointEstimate {
            points: gt.points.iter().map(|p| [p[0] + v[0], p[1] + v[1], p[2] + v[2]]).collect(),
        };
        let (mean, per_point) = joint_error(&est, &gt).unwrap();
        assert!((mean - vn).abs() < 1e-12);
        for e in per_point {
            assert!((e - vn).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_error_zero_breakdown_at_equality() {
        let gt = JointEstimate { points: vec![[1.0, 2.0, 3.0]; 4] };
        let (mean, per_point) = joint_error(&gt, &gt).unwrap();
        assert_eq!(mean, 0.0);
        assert!(per_point.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn overlay_identity_zero_and_idempotence() {
        let mut color = ColorImage::new(3, 2);
        for (i, v) in color.data.iter_mut().enumerate() {
            *v = (i as f32) / 18.0;
        }
        let ones = MaskImage { width: 3, height: 2, data: vec![1; 6] };
        assert_eq!(overlay(&color, &ones).unwrap(), color);

        let zeros = MaskImage::new(3, 2);
        let black = overlay(&color, &zeros).unwrap();
        assert!(black.data.iter().all(|&v| v == 0.0));

        let mut mixed = MaskImage::new(3, 2);
        mixed.set(1, 0, 1);
        mixed.set(2, 1, 1);
        let once = overlay(&color, &mixed).unwrap();
        let twice = overlay(&once, &mixed).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn overlay_rejects_mismatched_shapes() {
        let color = ColorImage::new(3, 2);
        let mask = MaskImage::new(2, 3);
        assert!(overlay(&color, &mask).is_err());
    }

    #[test]
    fn normalization_has_zero_mean_unit_scale() {
        let targets = vec![
            vec![[1.0, 10.0, -2.0], [3.0, 14.0, 0.0]],
            vec![[2.0, 12.0, -1.0], [2.0, 12.0, -1.0]],
        ];
        let norm = fit_normalization(&targets);
        let mut normalized = Vec::new();
        for s in &targets {
            for p in s {
                normalized.push(norm.normalize(*p));
            }
        }
        for a in 0..3 {
            let mean: f64 = normalized.iter().map(|p| p[a]).sum::<f64>() / normalized.len() as f64;
            let var: f64 =
                normalized.iter().map(|p| (p[a] - mean).powi(2)).sum::<f64>() / normalized.len() as f64;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn jointnet_config_output_is_three_k() {
        let config = JointNetConfig::desk();
        for k in [6usize, 7] {
            let net =
                Network::<f64>::from_specs(&config.input_shape(), &config.layer_specs(k), 0)
                    .unwrap();
            assert_eq!(net.output_shape().unwrap(), vec![3 * k]);
        }
    }

    #[test]
    fn jointnet_schedules_match_published_endpoints() {
        let config = JointNetConfig::full();
        let lr = config.lr_schedule();
        assert_eq!(lr.value(0).unwrap(), 0.03);
        assert_eq!(lr.value(config.epochs - 1).unwrap(), 1e-4);
        let mu = config.momentum_schedule();
        assert_eq!(mu.value(0).unwrap(), 0.9);
        assert_eq!(mu.value(config.epochs - 1).unwrap(), 0.999);
    }

    #[test]
    fn target_points_selection() {
        let points = vec![[0.0; 3], [1.0; 3], [2.0; 3]];
        assert_eq!(TargetPoints::JointsAndEndEffector.select(&points).len(), 3);
        let only = TargetPoints::JointsOnly.select(&points);
        assert_eq!(only.len(), 2);
        assert_eq!(only[1], [1.0; 3]);
    }
}
