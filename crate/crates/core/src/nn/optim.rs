//! SGD with momentum and the two schedule shapes used by the training runs.

use serde::{Deserialize, Serialize};

use super::{Network, Real, Tensor};
use crate::error::{Error, Result};

/// Velocity state for SGD with momentum: `v ← μv − η·g`, `p ← p + v`.
#[derive(Debug, Clone)]
pub struct SgdMomentum<T> {
    pub learning_rate: T,
    pub momentum: T,
    velocities: Vec<Tensor<T>>,
}

impl<T: Real> SgdMomentum<T> {
    pub fn new(net: &Network<T>, learning_rate: T, momentum: T) -> Self {
        let velocities = net.params().iter().map(|p| Tensor::zeros(p.shape())).collect();
        Self { learning_rate, momentum, velocities }
    }

    /// One update over parameters and their gradients (same order and shapes
    /// as `Network::params`).
    pub fn step(&mut self, params: &mut [&mut Tensor<T>], grads: &[&Tensor<T>]) {
        assert_eq!(params.len(), self.velocities.len());
        assert_eq!(grads.len(), self.velocities.len());
        for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.velocities) {
            assert_eq!(p.shape(), g.shape(), "gradient shape mismatch");
            let (lr, mu) = (self.learning_rate, self.momentum);
            for ((pv, &gv), vv) in
                p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut().iter_mut())
            {
                *vv = mu * *vv - lr * gv;
                *pv += *vv;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Geometric interpolation (used for learning rates).
    Exponential,
    /// Affine interpolation (used for momentum).
    Linear,
}

/// Epoch-indexed schedule with exact boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: f64,
    pub end: f64,
    pub total_epochs: usize,
    pub interpolation: Interpolation,
}

impl Schedule {
    pub fn exponential(start: f64, end: f64, total_epochs: usize) -> Self {
        Self { start, end, total_epochs, interpolation: Interpolation::Exponential }
    }

    pub fn linear(start: f64, end: f64, total_epochs: usize) -> Self {
        Self { start, end, total_epochs, interpolation: Interpolation::Linear }
    }

    pub fn value(&self, epoch: usize) -> Result<f64> {
        if epoch >= self.total_epochs {
            return Err(Error::ScheduleRange { epoch, total: self.total_epochs });
        }
        if epoch == 0 {
            return Ok(self.start);
        }
        if epoch == self.total_epochs - 1 {
            return Ok(self.end);
        }
        let t = epoch as f64 / (self.total_epochs - 1) as f64;
        Ok(match self.interpolation {
            Interpolation::Exponential => self.start * (self.end / self.start).powf(t),
            Interpolation::Linear => self.start + (self.end - self.start) * t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LayerSpec;

    fn one_param_net(value: f64) -> Network<f64> {
        let mut net = Network::from_specs(
            &[1],
            &[LayerSpec::Dense { in_size: 1, out_size: 1 }],
            0,
        )
        .unwrap();
        net.params_mut()[0].data_mut()[0] = value;
        net.params_mut()[1].data_mut()[0] = 0.0;
        net
    }

    fn grad(value: f64) -> (Tensor<f64>, Tensor<f64>) {
        (Tensor::new(vec![1, 1], vec![value]), Tensor::zeros(&[1]))
    }

    #[test]
    fn zero_momentum_is_plain_sgd() {
        let mut net = one_param_net(1.0);
        let mut opt = SgdMomentum::new(&net, 0.5, 0.0);
        let (gw, gb) = grad(2.0);
        opt.step(&mut net.params_mut(), &[&gw, &gb]);
        assert!((net.params()[0].data()[0] - 0.0).abs() < 1e-15); // 1 − 0.5·2
    }

    #[test]
    fn zero_gradient_zero_velocity_leaves_params_unchanged() {
        let mut net = one_param_net(3.25);
        let mut opt = SgdMomentum::new(&net, 0.1, 0.9);
        let (gw, gb) = grad(0.0);
        opt.step(&mut net.params_mut(), &[&gw, &gb]);
        assert_eq!(net.params()[0].data()[0], 3.25);
    }

    #[test]
    fn two_steps_match_hand_iteration() {
        // μ=0.9, η=0.1, g=1, p₀=0:
        //   v₁ = −0.1,  p₁ = −0.1
        //   v₂ = 0.9·(−0.1) − 0.1 = −0.19, p₂ = −0.29
        let mut net = one_param_net(0.0);
        let mut opt = SgdMomentum::new(&net, 0.1, 0.9);
        let (gw, gb) = grad(1.0);
        opt.step(&mut net.params_mut(), &[&gw, &gb]);
        assert!((net.params()[0].data()[0] + 0.1).abs() < 1e-15);
        opt.step(&mut net.params_mut(), &[&gw, &gb]);
        assert!((net.params()[0].data()[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn exponential_schedule_hits_endpoints_exactly() {
        let s = Schedule::exponential(0.001, 1e-6, 5000);
        assert_eq!(s.value(0).unwrap(), 0.001);
        assert_eq!(s.value(4999).unwrap(), 1e-6);
        // Monotone decreasing in between.
        let mut prev = s.value(0).unwrap();
        for e in (1..5000).step_by(250) {
            let v = s.value(e).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn linear_schedule_midpoint() {
        let s = Schedule::linear(0.9, 0.999, 3);
        assert!((s.value(1).unwrap() - 0.9495).abs() < 1e-12);
    }

    #[test]
    fn constant_schedule_when_start_equals_end() {
        let s = Schedule::exponential(0.25, 0.25, 10);
        for e in 0..10 {
            assert_eq!(s.value(e).unwrap(), 0.25);
        }
    }

    #[test]
    fn schedule_rejects_out_of_range_epoch() {
        let s = Schedule::linear(0.0, 1.0, 4);
        assert!(matches!(s.value(4), Err(Error::ScheduleRange { epoch: 4, total: 4 })));
    }
}
