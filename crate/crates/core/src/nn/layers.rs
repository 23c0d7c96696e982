//! Layer kinds and their forward/backward kernels.
//!
//! Convolution is cross-correlation with dilation, lowered to a GEMM via
//! im2col; the backward pass rebuilds the patch matrix instead of caching it,
//! trading ~15% compute for a flat memory profile.

use serde::{Deserialize, Serialize};

use super::{Real, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// Zero padding that preserves spatial dims at stride 1.
    Same,
    /// No padding.
    Valid,
}

/// Serializable architecture element. Parameters live in
/// [`super::network::Layer`]; this describes shapes only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        dilation: usize,
        stride: usize,
        padding: Padding,
    },
    MaxPool2d {
        window: usize,
        stride: usize,
    },
    Dense {
        in_size: usize,
        out_size: usize,
    },
    Relu,
    Sigmoid,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Conv2d { in_channels, out_channels, kernel, dilation, stride, .. } => {
                if kernel % 2 == 0 || kernel == 0 {
                    return Err(Error::ShapeMismatch(format!("conv kernel {kernel} must be odd")));
                }
                if dilation < 1 || stride < 1 || in_channels == 0 || out_channels == 0 {
                    return Err(Error::ShapeMismatch(
                        "conv needs dilation ≥ 1, stride ≥ 1, nonzero channels".into(),
                    ));
                }
            }
            LayerSpec::MaxPool2d { window, stride } => {
                if window < 2 || stride < 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "pool window {window} must be ≥ 2, stride {stride} ≥ 1"
                    )));
                }
            }
            LayerSpec::Dense { in_size, out_size } => {
                if in_size == 0 || out_size == 0 {
                    return Err(Error::ShapeMismatch("dense sizes must be nonzero".into()));
                }
            }
            LayerSpec::Relu | LayerSpec::Sigmoid => {}
        }
        Ok(())
    }

    /// Closed-form output shape for a given input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match *self {
            LayerSpec::Conv2d {
                in_channels, out_channels, kernel, dilation, stride, padding,
            } => {
                let [c, h, w] = chw(input)?;
                if c != in_channels {
                    return Err(Error::ShapeMismatch(format!(
                        "conv expects {in_channels} channels, input has {c}"
                    )));
                }
                let geo = ConvGeometry::new(h, w, kernel, dilation, stride, padding)?;
                Ok(vec![out_channels, geo.h_out, geo.w_out])
            }
            LayerSpec::MaxPool2d { window, stride } => {
                let [c, h, w] = chw(input)?;
                if h < window || w < window {
                    return Err(Error::ShapeMismatch(format!(
                        "pool window {window} exceeds input {h}×{w}"
                    )));
                }
                Ok(vec![c, (h - window) / stride + 1, (w - window) / stride + 1])
            }
            LayerSpec::Dense { in_size, out_size } => {
                let numel: usize = input.iter().product();
                if numel != in_size {
                    return Err(Error::ShapeMismatch(format!(
                        "dense expects {in_size} inputs, got {numel}"
                    )));
                }
                Ok(vec![out_size])
            }
            LayerSpec::Relu | LayerSpec::Sigmoid => Ok(input.to_vec()),
        }
    }

    /// Effective receptive field of one conv application: `d·(k−1)+1`.
    pub fn receptive_field(&self) -> Option<usize> {
        match *self {
            LayerSpec::Conv2d { kernel, dilation, .. } => Some(dilation * (kernel - 1) + 1),
            _ => None,
        }
    }
}

fn chw(shape: &[usize]) -> Result<[usize; 3]> {
    match shape {
        &[c, h, w] => Ok([c, h, w]),
        other => Err(Error::ShapeMismatch(format!("expected C×H×W input, got {other:?}"))),
    }
}

/// Resolved spatial geometry of one convolution.
#[derive(Debug, Clone, Copy)]
pub struct ConvGeometry {
    pub h_in: usize,
    pub w_in: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub stride: usize,
    pub pad: usize,
    pub h_out: usize,
    pub w_out: usize,
}

impl ConvGeometry {
    pub fn new(
        h: usize,
        w: usize,
        kernel: usize,
        dilation: usize,
        stride: usize,
        padding: Padding,
    ) -> Result<Self> {
        let eff = dilation * (kernel - 1) + 1;
        let pad = match padding {
            Padding::Same => (eff - 1) / 2,
            Padding::Valid => 0,
        };
        if h + 2 * pad < eff || w + 2 * pad < eff {
            return Err(Error::ShapeMismatch(format!(
                "conv field {eff} exceeds padded input {h}×{w}"
            )));
        }
        Ok(Self {
            h_in: h,
            w_in: w,
            kernel,
            dilation,
            stride,
            pad,
            h_out: (h + 2 * pad - eff) / stride + 1,
            w_out: (w + 2 * pad - eff) / stride + 1,
        })
    }
}

/// Lower `input[c_in, h, w]` into the patch matrix
/// `cols[c_in·k·k, h_out·w_out]`; out-of-image taps are zero.
///
/// At stride 1 each output row is a shifted copy of an input row, so the
/// interior is a straight slice copy with zero-filled edges.
fn im2col<T: Real>(geo: &ConvGeometry, c_in: usize, input: &[T], cols: &mut [T]) {
    let (h, w) = (geo.h_in, geo.w_in);
    let (ho, wo) = (geo.h_out, geo.w_out);
    let k = geo.kernel;
    debug_assert_eq!(cols.len(), c_in * k * k * ho * wo);
    for c in 0..c_in {
        let plane = &input[c * h * w..(c + 1) * h * w];
        for ki in 0..k {
            for kj in 0..k {
                let row = ((c * k + ki) * k + kj) * (ho * wo);
                let off = (kj * geo.dilation) as isize - geo.pad as isize;
                for oy in 0..ho {
                    let iy = (oy * geo.stride + ki * geo.dilation) as isize - geo.pad as isize;
                    let out_row = &mut cols[row + oy * wo..row + (oy + 1) * wo];
                    if iy < 0 || iy >= h as isize {
                        out_row.fill(T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                    if geo.stride == 1 {
                        // Valid input columns: off ≤ ix < w with ix = ox + off.
                        let lo = (-off).max(0) as usize; // first valid ox
                        let hi = ((w as isize - off).max(0) as usize).min(wo);
                        out_row[..lo.min(wo)].fill(T::zero());
                        if lo < hi {
                            out_row[lo..hi].copy_from_slice(
                                &src[(lo as isize + off) as usize..(hi as isize + off) as usize],
                            );
                        }
                        out_row[hi.max(lo)..].fill(T::zero());
                    } else {
                        for (ox, slot) in out_row.iter_mut().enumerate() {
                            let ix = (ox * geo.stride) as isize + off;
                            *slot = if ix < 0 || ix >= w as isize {
                                T::zero()
                            } else {
                                src[ix as usize]
                            };
                        }
                    }
                }
            }
        }
    }
}

/// Scatter-add inverse of [`im2col`].
fn col2im<T: Real>(geo: &ConvGeometry, c_in: usize, cols: &[T], input_grad: &mut [T]) {
    let (h, w) = (geo.h_in, geo.w_in);
    let (ho, wo) = (geo.h_out, geo.w_out);
    let k = geo.kernel;
    for c in 0..c_in {
        let plane = &mut input_grad[c * h * w..(c + 1) * h * w];
        for ki in 0..k {
            for kj in 0..k {
                let row = ((c * k + ki) * k + kj) * (ho * wo);
                let off = (kj * geo.dilation) as isize - geo.pad as isize;
                for oy in 0..ho {
                    let iy = (oy * geo.stride + ki * geo.dilation) as isize - geo.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                    let src = &cols[row + oy * wo..row + (oy + 1) * wo];
                    if geo.stride == 1 {
                        let lo = (-off).max(0) as usize;
                        let hi = ((w as isize - off).max(0) as usize).min(wo);
                        if lo < hi {
                            let dst_run =
                                &mut dst[(lo as isize + off) as usize..(hi as isize + off) as usize];
                            for (d, &s) in dst_run.iter_mut().zip(&src[lo..hi]) {
                                *d += s;
                            }
                        }
                    } else {
                        for (ox, &v) in src.iter().enumerate() {
                            let ix = (ox * geo.stride) as isize + off;
                            if ix >= 0 && ix < w as isize {
                                dst[ix as usize] += v;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Dilated cross-correlation: `weight[c_out, c_in·k·k] × patches + bias`.
pub fn conv2d_forward<T: Real>(
    spec: &LayerSpec,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    input: &Tensor<T>,
) -> Result<Tensor<T>> {
    let LayerSpec::Conv2d { in_channels, out_channels, kernel, dilation, stride, padding } = *spec
    else {
        return Err(Error::ShapeMismatch("conv2d_forward on non-conv spec".into()));
    };
    let out_shape = spec.output_shape(input.shape())?;
    let [_, h, w] = chw(input.shape())?;
    let geo = ConvGeometry::new(h, w, kernel, dilation, stride, padding)?;
    let ckk = in_channels * kernel * kernel;
    let hw_out = geo.h_out * geo.w_out;

    let mut out = vec![T::zero(); out_channels * hw_out];
    T::with_scratch(ckk * hw_out, |cols| {
        im2col(&geo, in_channels, input.data(), cols);
        T::gemm(out_channels, ckk, hw_out, T::one(), weight.data(), false, cols, false, T::zero(), &mut out);
    });
    for (o, &b) in bias.data().iter().enumerate() {
        for v in &mut out[o * hw_out..(o + 1) * hw_out] {
            *v += b;
        }
    }
    Ok(Tensor::new(out_shape, out))
}

/// Gradients of a conv layer: (d_weight, d_bias, d_input).
pub fn conv2d_backward<T: Real>(
    spec: &LayerSpec,
    weight: &Tensor<T>,
    input: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let LayerSpec::Conv2d { in_channels, out_channels, kernel, dilation, stride, padding } = *spec
    else {
        return Err(Error::ShapeMismatch("conv2d_backward on non-conv spec".into()));
    };
    let [_, h, w] = chw(input.shape())?;
    let geo = ConvGeometry::new(h, w, kernel, dilation, stride, padding)?;
    let ckk = in_channels * kernel * kernel;
    let hw_out = geo.h_out * geo.w_out;
    debug_assert_eq!(grad_out.numel(), out_channels * hw_out);

    let mut dw = vec![T::zero(); out_channels * ckk];
    let mut dx = vec![T::zero(); input.numel()];
    T::with_scratch(2 * ckk * hw_out, |scratch| {
        let (cols, dcols) = scratch.split_at_mut(ckk * hw_out);
        im2col(&geo, in_channels, input.data(), cols);
        // dW[c_out, ckk] = dY[c_out, hw] × colsᵀ
        T::gemm(out_channels, hw_out, ckk, T::one(), grad_out.data(), false, cols, true, T::zero(), &mut dw);
        // dcols[ckk, hw] = Wᵀ × dY, then scatter back to the input grid.
        T::gemm(ckk, out_channels, hw_out, T::one(), weight.data(), true, grad_out.data(), false, T::zero(), dcols);
        col2im(&geo, in_channels, dcols, &mut dx);
    });

    let mut db = vec![T::zero(); out_channels];
    for (o, slot) in db.iter_mut().enumerate() {
        *slot = grad_out.data()[o * hw_out..(o + 1) * hw_out].iter().copied().sum();
    }

    Ok((
        Tensor::new(weight.shape().to_vec(), dw),
        Tensor::new(vec![out_channels], db),
        Tensor::new(input.shape().to_vec(), dx),
    ))
}

/// Max pooling; returns the pooled tensor and per-cell argmax indices
/// (linear into the input) for the backward routing. Ties resolve to the
/// first cell in row-major scan order.
pub fn maxpool2d_forward<T: Real>(
    window: usize,
    stride: usize,
    input: &Tensor<T>,
) -> Result<(Tensor<T>, Vec<usize>)> {
    let [c, h, w] = chw(input.shape())?;
    if h < window || w < window {
        return Err(Error::ShapeMismatch(format!("pool window {window} exceeds input {h}×{w}")));
    }
    let ho = (h - window) / stride + 1;
    let wo = (w - window) / stride + 1;
    let mut out = vec![T::zero(); c * ho * wo];
    let mut argmax = vec![0usize; c * ho * wo];
    let data = input.data();
    for ci in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let mut best = T::neg_infinity();
                let mut best_idx = 0usize;
                for ky in 0..window {
                    let iy = oy * stride + ky;
                    for kx in 0..window {
                        let ix = ox * stride + kx;
                        let idx = (ci * h + iy) * w + ix;
                        if data[idx] > best {
                            best = data[idx];
                            best_idx = idx;
                        }
                    }
                }
                let oidx = (ci * ho + oy) * wo + ox;
                out[oidx] = best;
                argmax[oidx] = best_idx;
            }
        }
    }
    Ok((Tensor::new(vec![c, ho, wo], out), argmax))
}

/// Routes each upstream gradient to its argmax cell.
pub fn maxpool2d_backward<T: Real>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Tensor<T> {
    let mut dx = Tensor::zeros(input_shape);
    let data = dx.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        data[idx] += g;
    }
    dx
}

/// `W x + b` on the flattened input.
pub fn dense_forward<T: Real>(
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    input: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (out_size, in_size) = (weight.shape()[0], weight.shape()[1]);
    if input.numel() != in_size {
        return Err(Error::ShapeMismatch(format!(
            "dense expects {in_size} inputs, got {}",
            input.numel()
        )));
    }
    let mut out = bias.data().to_vec();
    T::gemm(out_size, in_size, 1, T::one(), weight.data(), false, input.data(), false, T::one(), &mut out);
    Ok(Tensor::new(vec![out_size], out))
}

/// Gradients of a dense layer: (d_weight, d_bias, d_input).
pub fn dense_backward<T: Real>(
    weight: &Tensor<T>,
    input: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (out_size, in_size) = (weight.shape()[0], weight.shape()[1]);
    let x = input.data();
    let g = grad_out.data();
    let mut dw = vec![T::zero(); out_size * in_size];
    for (o, &go) in g.iter().enumerate() {
        for (slot, &xi) in dw[o * in_size..(o + 1) * in_size].iter_mut().zip(x) {
            *slot = go * xi;
        }
    }
    let mut dx = vec![T::zero(); in_size];
    T::gemm(in_size, out_size, 1, T::one(), weight.data(), true, g, false, T::zero(), &mut dx);
    (
        Tensor::new(vec![out_size, in_size], dw),
        Tensor::new(vec![out_size], g.to_vec()),
        Tensor::new(input.shape().to_vec(), dx),
    )
}

pub fn relu_forward<T: Real>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|v| if v > T::zero() { v } else { T::zero() })
}

pub fn relu_backward<T: Real>(input: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

pub fn sigmoid_forward<T: Real>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|v| {
        // Branch on sign for numerical stability.
        if v >= T::zero() {
            T::one() / (T::one() + (-v).exp())
        } else {
            let e = v.exp();
            e / (T::one() + e)
        }
    })
}

/// Backward through sigmoid given its forward *output*.
pub fn sigmoid_backward<T: Real>(output: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let data = output
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&y, &g)| g * y * (T::one() - y))
        .collect();
    Tensor::new(output.shape().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv_spec(c_in: usize, c_out: usize, dilation: usize) -> LayerSpec {
        LayerSpec::Conv2d {
            in_channels: c_in,
            out_channels: c_out,
            kernel: 3,
            dilation,
            stride: 1,
            padding: Padding::Same,
        }
    }

    #[test]
    fn conv_same_padding_preserves_half_sensor_resolution() {
        let spec = conv_spec(1, 1, 1);
        assert_eq!(spec.output_shape(&[1, 212, 256]).unwrap(), vec![1, 212, 256]);
    }

    #[test]
    fn conv_zero_kernel_zero_bias_gives_zero() {
        let spec = conv_spec(1, 1, 1);
        let w = Tensor::<f64>::zeros(&[1, 1, 3, 3]);
        let b = Tensor::<f64>::zeros(&[1]);
        let x = Tensor::<f64>::full(&[1, 1, 1], 5.0);
        let y = conv2d_forward(&spec, &w, &b, &x).unwrap();
        assert_eq!(y.data(), &[0.0]);
    }

    #[test]
    fn conv_dilation_two_has_receptive_field_five() {
        let spec = conv_spec(1, 1, 2);
        assert_eq!(spec.receptive_field(), Some(5));

        // Impulse response support equals the receptive field.
        let w = Tensor::<f64>::full(&[1, 1, 3, 3], 1.0);
        let b = Tensor::<f64>::zeros(&[1]);
        let mut x = Tensor::<f64>::zeros(&[1, 11, 11]);
        x.data_mut()[5 * 11 + 5] = 1.0;
        let y = conv2d_forward(&spec, &w, &b, &x).unwrap();
        let rows: Vec<usize> = (0..11)
            .filter(|&r| (0..11).any(|c| y.data()[r * 11 + c] != 0.0))
            .collect();
        assert_eq!(rows, vec![3, 5, 7], "dilated taps land every d pixels");
        let cols: Vec<usize> = (0..11)
            .filter(|&c| (0..11).any(|r| y.data()[r * 11 + c] != 0.0))
            .collect();
        assert_eq!(cols.last().unwrap() - cols.first().unwrap() + 1, 5);
    }

    #[test]
    fn conv_matches_direct_convolution_oracle() {
        // Direct nested-loop cross-correlation, no im2col.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let (c_in, c_out, h, w) = (2, 3, 6, 5);
        let spec = conv_spec(c_in, c_out, 2);
        let weight =
            Tensor::<f64>::new(vec![c_out, c_in, 3, 3], (0..c_out * c_in * 9).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let bias = Tensor::<f64>::new(vec![c_out], (0..c_out).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let input =
            Tensor::<f64>::new(vec![c_in, h, w], (0..c_in * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect());

        let y = conv2d_forward(&spec, &weight, &bias, &input).unwrap();

        let pad = 2usize; // d·(k−1)/2
        for o in 0..c_out {
            for oy in 0..h {
                for ox in 0..w {
                    let mut acc = bias.data()[o];
                    for c in 0..c_in {
                        for ki in 0..3 {
                            for kj in 0..3 {
                                let iy = oy as isize + (ki * 2) as isize - pad as isize;
                                let ix = ox as isize + (kj * 2) as isize - pad as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                    continue;
                                }
                                acc += weight.data()[((o * c_in + c) * 3 + ki) * 3 + kj]
                                    * input.data()[(c * h + iy as usize) * w + ix as usize];
                            }
                        }
                    }
                    let got = y.data()[(o * h + oy) * w + ox];
                    assert!((got - acc).abs() < 1e-12, "({o},{oy},{ox}): {got} vs {acc}");
                }
            }
        }
    }

    #[test]
    fn maxpool_two_by_two() {
        let x = Tensor::<f32>::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let (y, argmax) = maxpool2d_forward(2, 2, &x).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(argmax, vec![3]);
    }

    #[test]
    fn maxpool_constant_input_stays_constant() {
        let x = Tensor::<f32>::full(&[2, 4, 4], 7.5);
        let (y, _) = maxpool2d_forward(2, 2, &x).unwrap();
        assert!(y.data().iter().all(|&v| v == 7.5));
    }

    #[test]
    fn maxpool_window_larger_than_input_errors() {
        let x = Tensor::<f32>::zeros(&[1, 1, 1]);
        assert!(maxpool2d_forward(2, 2, &x).is_err());
    }

    #[test]
    fn maxpool_backward_routes_to_argmax_only() {
        // Finite differences per input cell: perturbing the argmax cell moves
        // the pooled sum, perturbing any other cell does not.
        let base = vec![0.1, 0.9, 0.4, 0.3];
        let eps = 1e-6;
        let pooled_sum = |data: &[f64]| {
            let t = Tensor::<f64>::new(vec![1, 2, 2], data.to_vec());
            maxpool2d_forward(2, 2, &t).unwrap().0.data().iter().sum::<f64>()
        };
        let x = Tensor::<f64>::new(vec![1, 2, 2], base.clone());
        let (y, argmax) = maxpool2d_forward(2, 2, &x).unwrap();
        let dx = maxpool2d_backward(&[1, 2, 2], &argmax, &Tensor::full(y.shape(), 1.0));
        for i in 0..4 {
            let mut plus = base.clone();
            plus[i] += eps;
            let mut minus = base.clone();
            minus[i] -= eps;
            let numeric = (pooled_sum(&plus) - pooled_sum(&minus)) / (2.0 * eps);
            assert!((dx.data()[i] - numeric).abs() < 1e-9, "cell {i}");
        }
    }

    #[test]
    fn dense_identity_and_zero() {
        let eye = Tensor::<f64>::new(vec![3, 3], vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        let zero_b = Tensor::<f64>::zeros(&[3]);
        let x = Tensor::<f64>::new(vec![3], vec![0.2, -0.5, 0.9]);
        let y = dense_forward(&eye, &zero_b, &x).unwrap();
        assert_eq!(y.data(), x.data());

        let zero_w = Tensor::<f64>::zeros(&[3, 3]);
        let b = Tensor::<f64>::full(&[3], 4.5);
        let y = dense_forward(&zero_w, &b, &x).unwrap();
        assert!(y.data().iter().all(|&v| v == 4.5));
    }

    #[test]
    fn dense_matches_hand_matrix_multiply() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let w = Tensor::<f64>::new(vec![3, 4], (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let b = Tensor::<f64>::new(vec![3], (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let x = Tensor::<f64>::new(vec![4], (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let y = dense_forward(&w, &b, &x).unwrap();
        for o in 0..3 {
            let mut acc = b.data()[o];
            for i in 0..4 {
                acc += w.data()[o * 4 + i] * x.data()[i];
            }
            assert!((y.data()[o] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_weight_gradient_is_outer_product() {
        let w = Tensor::<f64>::zeros(&[2, 3]);
        let x = Tensor::<f64>::new(vec![3], vec![1.0, 2.0, 3.0]);
        let g = Tensor::<f64>::new(vec![2], vec![10.0, 20.0]);
        let (dw, db, _) = dense_backward(&w, &x, &g);
        assert_eq!(dw.data(), &[10., 20., 30., 20., 40., 60.]);
        assert_eq!(db.data(), g.data());
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        let x = Tensor::<f32>::new(vec![3], vec![-100.0, 0.0, 100.0]);
        let y = sigmoid_forward(&x);
        assert!(y.is_finite());
        assert!(y.data()[0] >= 0.0 && y.data()[0] < 1e-6);
        assert_eq!(y.data()[1], 0.5);
        assert!(y.data()[2] > 1.0 - 1e-6 && y.data()[2] <= 1.0);
    }
}
