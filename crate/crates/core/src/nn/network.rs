//! Sequential network container: parameters, traced forward pass, exact
//! reverse-mode backward pass.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool2d_backward,
    maxpool2d_forward, relu_backward, relu_forward, sigmoid_backward, sigmoid_forward, LayerSpec,
};
use super::{Real, Tensor};
use crate::error::{Error, Result};

/// A layer with its parameters (if any).
#[derive(Debug, Clone)]
pub struct Layer<T> {
    pub spec: LayerSpec,
    pub weight: Option<Tensor<T>>,
    pub bias: Option<Tensor<T>>,
}

/// A feed-forward stack of layers with a fixed input shape.
#[derive(Debug, Clone)]
pub struct Network<T> {
    input_shape: Vec<usize>,
    layers: Vec<Layer<T>>,
}

/// Saved activations of one traced forward pass.
pub struct Trace<T> {
    /// `activations[0]` is the input; `activations[i+1]` is layer i's output.
    pub activations: Vec<Tensor<T>>,
    /// Argmax routing for pool layers, `None` elsewhere.
    pool_argmax: Vec<Option<Vec<usize>>>,
}

impl<T: Real> Trace<T> {
    pub fn output(&self) -> &Tensor<T> {
        self.activations.last().expect("trace has activations")
    }
}

/// Parameter gradients aligned with the network's layer order, plus the
/// gradient with respect to the input.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub input: Tensor<T>,
    /// One entry per layer: `(d_weight, d_bias)` for parametric layers.
    pub per_layer: Vec<Option<(Tensor<T>, Tensor<T>)>>,
}

impl<T: Real> Gradients<T> {
    /// Flattened view over parametric layers, weight before bias.
    pub fn param_grads(&self) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        for entry in self.per_layer.iter().flatten() {
            out.push(&entry.0);
            out.push(&entry.1);
        }
        out
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) {
        self.input.add_assign(&other.input);
        for (a, b) in self.per_layer.iter_mut().zip(&other.per_layer) {
            match (a, b) {
                (Some((aw, ab)), Some((bw, bb))) => {
                    aw.add_assign(bw);
                    ab.add_assign(bb);
                }
                (None, None) => {}
                _ => panic!("gradient layouts differ"),
            }
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        self.input.scale_in_place(s);
        for entry in self.per_layer.iter_mut().flatten() {
            entry.0.scale_in_place(s);
            entry.1.scale_in_place(s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.input.is_finite()
            && self
                .per_layer
                .iter()
                .flatten()
                .all(|(w, b)| w.is_finite() && b.is_finite())
    }
}

impl<T: Real> Network<T> {
    /// Build a network from layer specs, initializing weights with fan-in
    /// scaled uniform values (`±√(6/fan_in)`) drawn from `seed`, biases zero.
    pub fn from_specs(input_shape: &[usize], specs: &[LayerSpec], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(specs.len());
        let mut shape = input_shape.to_vec();
        for spec in specs {
            spec.validate()?;
            shape = spec.output_shape(&shape)?; // also validates compatibility
            let (weight, bias) = match *spec {
                LayerSpec::Conv2d { in_channels, out_channels, kernel, .. } => {
                    let fan_in = in_channels * kernel * kernel;
                    let w = init_uniform(&mut rng, &[out_channels, in_channels, kernel, kernel], fan_in);
                    (Some(w), Some(Tensor::zeros(&[out_channels])))
                }
                LayerSpec::Dense { in_size, out_size } => {
                    let w = init_uniform(&mut rng, &[out_size, in_size], in_size);
                    (Some(w), Some(Tensor::zeros(&[out_size])))
                }
                _ => (None, None),
            };
            layers.push(Layer { spec: spec.clone(), weight, bias });
        }
        Ok(Self { input_shape: input_shape.to_vec(), layers })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec.clone()).collect()
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        let mut shape = self.input_shape.clone();
        for layer in &self.layers {
            shape = layer.spec.output_shape(&shape)?;
        }
        Ok(shape)
    }

    /// Total number of trainable scalars.
    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.numel()).sum()
    }

    /// Parameters in a fixed order: layer order, weight before bias.
    pub fn params(&self) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        for layer in &self.layers {
            if let (Some(w), Some(b)) = (&layer.weight, &layer.bias) {
                out.push(w);
                out.push(b);
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            if let (Some(w), Some(b)) = (&mut layer.weight, &mut layer.bias) {
                out.push(w);
                out.push(b);
            }
        }
        out
    }

    fn check_input(&self, input: &Tensor<T>) -> Result<()> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "network expects input {:?}, got {:?}",
                self.input_shape,
                input.shape()
            )));
        }
        Ok(())
    }

    /// Inference pass; does not retain intermediate activations.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(input)?;
        let mut current = input.clone();
        for layer in &self.layers {
            current = self.apply_layer(layer, &current)?.0;
        }
        Ok(current)
    }

    /// Forward pass that records everything the backward pass needs.
    pub fn forward_trace(&self, input: &Tensor<T>) -> Result<Trace<T>> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pool_argmax = Vec::with_capacity(self.layers.len());
        activations.push(input.clone());
        for layer in &self.layers {
            let (out, argmax) = self.apply_layer(layer, activations.last().unwrap())?;
            activations.push(out);
            pool_argmax.push(argmax);
        }
        Ok(Trace { activations, pool_argmax })
    }

    fn apply_layer(&self, layer: &Layer<T>, x: &Tensor<T>) -> Result<(Tensor<T>, Option<Vec<usize>>)> {
        match &layer.spec {
            LayerSpec::Conv2d { .. } => {
                let (w, b) = (layer.weight.as_ref().unwrap(), layer.bias.as_ref().unwrap());
                Ok((conv2d_forward(&layer.spec, w, b, x)?, None))
            }
            LayerSpec::MaxPool2d { window, stride } => {
                let (out, argmax) = maxpool2d_forward(*window, *stride, x)?;
                Ok((out, Some(argmax)))
            }
            LayerSpec::Dense { .. } => {
                let (w, b) = (layer.weight.as_ref().unwrap(), layer.bias.as_ref().unwrap());
                Ok((dense_forward(w, b, x)?, None))
            }
            LayerSpec::Relu => Ok((relu_forward(x), None)),
            LayerSpec::Sigmoid => Ok((sigmoid_forward(x), None)),
        }
    }

    /// Exact reverse-mode gradients of a scalar loss, given the trace of the
    /// forward pass and `d(loss)/d(output)`.
    pub fn backward(&self, trace: &Trace<T>, grad_output: &Tensor<T>) -> Result<Gradients<T>> {
        if grad_output.shape() != trace.output().shape() {
            return Err(Error::ShapeMismatch(format!(
                "grad_output shape {:?} does not match network output {:?}",
                grad_output.shape(),
                trace.output().shape()
            )));
        }
        let mut per_layer: Vec<Option<(Tensor<T>, Tensor<T>)>> = vec![None; self.layers.len()];
        let mut grad = grad_output.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.activations[i];
            grad = match &layer.spec {
                LayerSpec::Conv2d { .. } => {
                    let w = layer.weight.as_ref().unwrap();
                    let (dw, db, dx) = conv2d_backward(&layer.spec, w, input, &grad)?;
                    per_layer[i] = Some((dw, db));
                    dx
                }
                LayerSpec::MaxPool2d { .. } => {
                    let argmax = trace.pool_argmax[i].as_ref().expect("pool trace");
                    // Upstream grad may arrive flattened from a dense layer.
                    let expected = self.layers[i].spec.output_shape(input.shape())?;
                    let g = grad.clone().reshaped(expected);
                    maxpool2d_backward(input.shape(), argmax, &g)
                }
                LayerSpec::Dense { .. } => {
                    let w = layer.weight.as_ref().unwrap();
                    let (dw, db, dx) = dense_backward(w, input, &grad);
                    per_layer[i] = Some((dw, db));
                    dx
                }
                LayerSpec::Relu => relu_backward(input, &grad),
                LayerSpec::Sigmoid => sigmoid_backward(&trace.activations[i + 1], &grad),
            };
        }
        Ok(Gradients { input: grad, per_layer })
    }

    /// Zero-valued gradients with this network's layout.
    pub fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            input: Tensor::zeros(&self.input_shape),
            per_layer: self
                .layers
                .iter()
                .map(|l| {
                    l.weight.as_ref().map(|w| {
                        (Tensor::zeros(w.shape()), Tensor::zeros(l.bias.as_ref().unwrap().shape()))
                    })
                })
                .collect(),
        }
    }
}

fn init_uniform<T: Real>(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize) -> Tensor<T> {
    let bound = T::from_f64((6.0 / fan_in as f64).sqrt());
    let dist = Uniform::new_inclusive(-bound, bound);
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| dist.sample(rng)).collect())
}
