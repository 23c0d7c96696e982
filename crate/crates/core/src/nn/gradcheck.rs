//! Central-difference verification of the analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Network, Real, Tensor};
use crate::error::Result;

/// Compare analytic parameter gradients against central finite differences on
/// a random subsample of coordinates; returns the max relative error
/// `|a − n| / max(|a|, |n|, 1e-8)`.
///
/// `loss` maps the network output to a scalar and its gradient. Run this with
/// `T = f64`; in single precision the differences drown in rounding.
pub fn grad_check<T, L>(
    net: &mut Network<T>,
    input: &Tensor<T>,
    loss: L,
    epsilon: f64,
    coords: usize,
    seed: u64,
) -> Result<f64>
where
    T: Real,
    L: Fn(&Tensor<T>) -> (T, Tensor<T>),
{
    let trace = net.forward_trace(input)?;
    let (_, grad_out) = loss(trace.output());
    let grads = net.backward(&trace, &grad_out)?;
    let analytic: Vec<T> =
        grads.param_grads().iter().flat_map(|t| t.data().iter().copied()).collect();

    let total = net.param_count();
    let n_coords = coords.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = sample(&mut rng, total, n_coords);

    let eps = T::from_f64(epsilon);
    let mut max_rel: f64 = 0.0;
    for flat_idx in picked {
        let original = read_param(net, flat_idx);
        write_param(net, flat_idx, original + eps);
        let plus = loss(&net.forward(input)?).0;
        write_param(net, flat_idx, original - eps);
        let minus = loss(&net.forward(input)?).0;
        write_param(net, flat_idx, original);

        let numeric = (plus - minus).into_f64() / (2.0 * epsilon);
        let a = analytic[flat_idx].into_f64();
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

fn read_param<T: Real>(net: &Network<T>, flat_idx: usize) -> T {
    let mut idx = flat_idx;
    for p in net.params() {
        if idx < p.numel() {
            return p.data()[idx];
        }
        idx -= p.numel();
    }
    panic!("parameter index {flat_idx} out of range");
}

fn write_param<T: Real>(net: &mut Network<T>, flat_idx: usize, value: T) {
    let mut idx = flat_idx;
    for p in net.params_mut() {
        if idx < p.numel() {
            p.data_mut()[idx] = value;
            return;
        }
        idx -= p.numel();
    }
    panic!("parameter index {flat_idx} out of range");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{LayerSpec, Padding};

    /// Quadratic loss ½‖y‖² with gradient y.
    fn quadratic(y: &Tensor<f64>) -> (f64, Tensor<f64>) {
        let l = y.data().iter().map(|v| 0.5 * v * v).sum();
        (l, y.clone())
    }

    #[test]
    fn linear_network_gradients_are_exact() {
        // Linear network + linear loss functional: central differences are
        // exact up to rounding of the difference quotient.
        let mut net = Network::<f64>::from_specs(
            &[6],
            &[
                LayerSpec::Dense { in_size: 6, out_size: 4 },
                LayerSpec::Dense { in_size: 4, out_size: 2 },
            ],
            1,
        )
        .unwrap();
        let input = Tensor::from_f64_slice(&[6], &[0.3, -0.8, 0.1, 0.9, -0.4, 0.6]);
        let sum_loss = |y: &Tensor<f64>| (y.data().iter().sum(), Tensor::full(y.shape(), 1.0));
        // For linear maps the central difference is ε-independent, so a large
        // power-of-two ε avoids both representation and cancellation error.
        let err = grad_check(&mut net, &input, sum_loss, 0.5, 200, 2).unwrap();
        assert!(err < 1e-10, "max relative error {err}");
    }

    #[test]
    fn small_conv_stack_passes_gradient_check() {
        let mut net = Network::<f64>::from_specs(
            &[2, 6, 6],
            &[
                LayerSpec::Conv2d {
                    in_channels: 2,
                    out_channels: 3,
                    kernel: 3,
                    dilation: 2,
                    stride: 1,
                    padding: Padding::Same,
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2, stride: 2 },
                LayerSpec::Dense { in_size: 27, out_size: 5 },
                LayerSpec::Sigmoid,
            ],
            3,
        )
        .unwrap();
        let input = Tensor::from_f64_slice(
            &[2, 6, 6],
            &(0..72).map(|i| ((i * 37 % 23) as f64 / 23.0) - 0.45).collect::<Vec<_>>(),
        );
        let err = grad_check(&mut net, &input, quadratic, 1e-5, 150, 4).unwrap();
        assert!(err < 1e-7, "max relative error {err}");
    }
}
