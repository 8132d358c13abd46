use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::kernels::{self, ConvGeom};
use super::{LayerSpec, Real, Shape};
use crate::encoding::{CombinatorialEncoder, Encoder, EncodingConfig, OneHotEncoder};
use crate::error::{Error, Result};
use crate::word::Alphabet;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerParams<T> {
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

/// Parameter gradients, shaped like [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Real> Grads<T> {
    pub fn zero(&mut self) {
        for p in &mut self.layers {
            p.weight.iter_mut().for_each(|x| *x = T::zero());
            p.bias.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    /// Parameter-order iteration: layer by layer, weight then bias.
    pub fn tensors(&self) -> impl Iterator<Item = &Vec<T>> {
        self.layers.iter().flat_map(|p| [&p.weight, &p.bias])
    }
}

/// A sequential network: layer specs, their shapes, and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    input: Shape,
    layers: Vec<LayerSpec>,
    shapes: Vec<Shape>,
    params: Vec<LayerParams<T>>,
}

/// Per-sample activations and scratch kept between forward and backward.
#[derive(Debug, Clone, Default)]
pub struct Trace<T> {
    acts: Vec<Vec<T>>,
    cols: Vec<Vec<T>>,
    argmax: Vec<Vec<u32>>,
    dcols: Vec<T>,
    grad: Vec<T>,
    grad_next: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub fn output(&self) -> &[T] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Input to layer `i`.
    pub fn activation(&self, i: usize) -> &[T] {
        &self.acts[i]
    }
}

impl<T: Real> Network<T> {
    /// A network with zeroed parameters.
    pub fn new(input: Shape, layers: Vec<LayerSpec>) -> Result<Self> {
        let mut shapes = vec![input];
        let mut params = Vec::with_capacity(layers.len());
        for (i, layer) in layers.iter().enumerate() {
            let s = *shapes.last().unwrap();
            let (w, b) = layer.param_lens(s).unwrap_or((0, 0));
            params.push(LayerParams {
                weight: vec![T::zero(); w],
                bias: vec![T::zero(); b],
            });
            shapes.push(layer.output_shape(s, i)?);
        }
        Ok(Network {
            input,
            layers,
            shapes,
            params,
        })
    }

    /// He-normal weights, std √(2 / fan_in), and zero biases.
    pub fn init_he(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, layer) in self.layers.iter().enumerate() {
            let fan_in = layer.fan_in(self.shapes[i]);
            if fan_in == 0 {
                continue;
            }
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite std");
            for w in &mut self.params[i].weight {
                *w = T::of(normal.sample(&mut rng));
            }
            self.params[i].bias.iter_mut().for_each(|b| *b = T::zero());
        }
    }

    pub fn input_shape(&self) -> Shape {
        self.input
    }

    pub fn output_shape(&self) -> Shape {
        *self.shapes.last().unwrap()
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Input shape of every layer followed by the output shape.
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn params(&self) -> &[LayerParams<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [LayerParams<T>] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.weight.len() + p.bias.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads<T> {
        Grads {
            layers: self
                .params
                .iter()
                .map(|p| LayerParams {
                    weight: vec![T::zero(); p.weight.len()],
                    bias: vec![T::zero(); p.bias.len()],
                })
                .collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            input: self.input,
            layers: self.layers.clone(),
            shapes: self.shapes.clone(),
            params: self
                .params
                .iter()
                .map(|p| LayerParams {
                    weight: p.weight.iter().map(|x| U::of(x.as_f64())).collect(),
                    bias: p.bias.iter().map(|x| U::of(x.as_f64())).collect(),
                })
                .collect(),
        }
    }

    fn conv_geom(&self, i: usize) -> ConvGeom {
        match self.layers[i] {
            LayerSpec::Conv2d {
                kernel: (kh, kw),
                stride,
                ..
            } => ConvGeom {
                input: self.shapes[i],
                output: self.shapes[i + 1],
                kh,
                kw,
                stride,
            },
            _ => unreachable!("not a convolution"),
        }
    }

    /// Runs every layer on one sample, keeping what backward needs.
    pub fn forward<'t>(&self, input: &[T], trace: &'t mut Trace<T>) -> Result<&'t [T]> {
        if input.len() != self.input.len() {
            return Err(Error::Shape {
                layer: 0,
                kind: self.layers.first().map_or("input", LayerSpec::kind),
                detail: format!("expected {} inputs ({}), got {}", self.input.len(), self.input, input.len()),
            });
        }
        let n = self.layers.len();
        trace.acts.resize_with(n + 1, Vec::new);
        trace.cols.resize_with(n, Vec::new);
        trace.argmax.resize_with(n, Vec::new);
        trace.acts[0].clear();
        trace.acts[0].extend_from_slice(input);
        for i in 0..n {
            let (before, after) = trace.acts.split_at_mut(i + 1);
            let x = &before[i];
            let y = &mut after[0];
            y.resize(self.shapes[i + 1].len(), T::zero());
            let p = &self.params[i];
            match self.layers[i] {
                LayerSpec::Conv2d { .. } => {
                    kernels::conv_forward(&self.conv_geom(i), x, &p.weight, &p.bias, &mut trace.cols[i], y)
                }
                LayerSpec::MaxPool2d { size } => {
                    kernels::maxpool_forward(x, self.shapes[i], size, y, &mut trace.argmax[i])
                }
                LayerSpec::Relu => {
                    for (o, &v) in y.iter_mut().zip(x.iter()) {
                        *o = v.max(T::zero());
                    }
                }
                LayerSpec::Flatten => y.copy_from_slice(x),
                LayerSpec::Dense { .. } => kernels::dense_forward(x, &p.weight, &p.bias, y),
                LayerSpec::Sigmoid => {
                    for (o, &v) in y.iter_mut().zip(x.iter()) {
                        *o = kernels::sigmoid(v);
                    }
                }
            }
        }
        Ok(trace.output())
    }

    /// Back-propagates `grad_out`, the gradient w.r.t. the output of layer
    /// `end - 1`, through layers `end - 1` down to 0, accumulating into
    /// `grads`. Returns the gradient w.r.t. the network input when asked.
    pub fn backward(
        &self,
        trace: &mut Trace<T>,
        end: usize,
        grad_out: &[T],
        grads: &mut Grads<T>,
        want_input_grad: bool,
    ) -> Option<Vec<T>> {
        let mut g = std::mem::take(&mut trace.grad);
        let mut gn = std::mem::take(&mut trace.grad_next);
        g.clear();
        g.extend_from_slice(grad_out);
        for i in (0..end).rev() {
            let need = i > 0 || want_input_grad;
            gn.resize(self.shapes[i].len(), T::zero());
            let x = &trace.acts[i];
            match self.layers[i] {
                LayerSpec::Conv2d { .. } => {
                    let gp = &mut grads.layers[i];
                    kernels::conv_backward(
                        &self.conv_geom(i),
                        x,
                        &trace.cols[i],
                        &self.params[i].weight,
                        &g,
                        &mut gp.weight,
                        &mut gp.bias,
                        need.then_some(gn.as_mut_slice()),
                        &mut trace.dcols,
                    );
                }
                LayerSpec::Dense { .. } => {
                    let gp = &mut grads.layers[i];
                    kernels::dense_backward(
                        x,
                        &self.params[i].weight,
                        &g,
                        &mut gp.weight,
                        &mut gp.bias,
                        need.then_some(gn.as_mut_slice()),
                    );
                }
                LayerSpec::MaxPool2d { .. } => kernels::maxpool_backward(&g, &trace.argmax[i], &mut gn),
                LayerSpec::Relu => {
                    for ((o, &d), &v) in gn.iter_mut().zip(&g).zip(x) {
                        *o = if v > T::zero() { d } else { T::zero() };
                    }
                }
                LayerSpec::Flatten => gn.copy_from_slice(&g),
                LayerSpec::Sigmoid => {
                    let y = &trace.acts[i + 1];
                    for ((o, &d), &p) in gn.iter_mut().zip(&g).zip(y) {
                        *o = d * p * (T::one() - p);
                    }
                }
            }
            std::mem::swap(&mut g, &mut gn);
        }
        let input_grad = want_input_grad.then(|| g.clone());
        trace.grad = g;
        trace.grad_next = gn;
        input_grad
    }

    /// Accumulates `scale`·∂BCE/∂θ for one sample whose forward pass is in
    /// `trace`. The final sigmoid is folded in: ∂BCE/∂logit = p − y.
    pub fn bce_backward(&self, trace: &mut Trace<T>, label: T, scale: T, grads: &mut Grads<T>) -> Result<()> {
        let n = self.layers.len();
        if self.layers.last() != Some(&LayerSpec::Sigmoid) || self.output_shape().len() != 1 {
            return Err(Error::Shape {
                layer: n.saturating_sub(1),
                kind: self.layers.last().map_or("output", LayerSpec::kind),
                detail: "binary cross-entropy needs a single sigmoid output".into(),
            });
        }
        let p = trace.output()[0];
        self.backward(trace, n - 1, &[(p - label) * scale], grads, false);
        Ok(())
    }
}

/// How words are turned into inputs for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSpec {
    Combinatorial(EncodingConfig),
    OneHot { word_length: usize },
}

/// A 32-bit network plus everything needed to feed it words.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub network: Network<f32>,
    pub input: InputSpec,
    /// The task alphabet; one-hot columns follow its order.
    pub alphabet: Alphabet,
    pub seed: u64,
}

impl ModelParams {
    pub fn encoder(&self) -> Result<Box<dyn Encoder>> {
        Ok(match self.input {
            InputSpec::Combinatorial(cfg) => Box::new(CombinatorialEncoder::new(cfg)?),
            InputSpec::OneHot { word_length } => {
                Box::new(OneHotEncoder::new(self.alphabet.clone(), word_length))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_outputs_half() {
        let net: Network<f32> = Network::new(
            Shape::new(6, 6, 3),
            vec![
                LayerSpec::conv(4, 3, 3),
                LayerSpec::Relu,
                LayerSpec::pool(2, 2),
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 1 },
                LayerSpec::Sigmoid,
            ],
        )
        .unwrap();
        let mut trace = Trace::default();
        for seed in 0..3 {
            let x: Vec<f32> = (0..108).map(|i| ((i + seed) as f32).sin()).collect();
            assert_eq!(net.forward(&x, &mut trace).unwrap(), &[0.5]);
        }
    }

    #[test]
    fn dense_logit_by_hand() {
        let mut net: Network<f64> = Network::new(
            Shape::new(1, 1, 3),
            vec![LayerSpec::Dense { units: 1 }, LayerSpec::Sigmoid],
        )
        .unwrap();
        net.params_mut()[0].weight = vec![0.0, 2.0, 0.0];
        net.params_mut()[0].bias = vec![-0.5];
        let mut trace = Trace::default();
        let p = net.forward(&[0.0, 1.0, 0.0], &mut trace).unwrap()[0];
        assert!((p - 1.0 / (1.0 + (-1.5f64).exp())).abs() < 1e-15);
        assert_eq!(trace.activation(1), &[1.5]);
    }

    #[test]
    fn input_size_mismatch_names_layer() {
        let net: Network<f32> = Network::new(Shape::new(1, 1, 3), vec![LayerSpec::Dense { units: 1 }]).unwrap();
        let mut trace = Trace::default();
        assert!(matches!(
            net.forward(&[1.0, 2.0], &mut trace),
            Err(Error::Shape { layer: 0, kind: "dense", .. })
        ));
    }

    #[test]
    fn stationary_output_bias_at_label() {
        // p = σ(b) = y gives zero bias gradient
        let mut net: Network<f64> = Network::new(
            Shape::new(1, 1, 2),
            vec![LayerSpec::Dense { units: 1 }, LayerSpec::Sigmoid],
        )
        .unwrap();
        net.params_mut()[0].bias = vec![(0.3f64 / 0.7).ln()];
        let mut trace = Trace::default();
        let mut grads = net.zero_grads();
        net.forward(&[0.0, 0.0], &mut trace).unwrap();
        net.bce_backward(&mut trace, 0.3, 1.0, &mut grads).unwrap();
        assert!(grads.layers[0].bias[0].abs() < 1e-12);
    }

    #[test]
    fn duplicated_sample_doubles_contribution() {
        let mut net: Network<f64> = Network::new(
            Shape::new(3, 3, 2),
            vec![
                LayerSpec::conv(2, 2, 2),
                LayerSpec::Relu,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 1 },
                LayerSpec::Sigmoid,
            ],
        )
        .unwrap();
        net.init_he(4);
        let x: Vec<f64> = (0..18).map(|i| (i as f64 * 0.7).cos()).collect();
        let mut trace = Trace::default();
        let mut once = net.zero_grads();
        net.forward(&x, &mut trace).unwrap();
        net.bce_backward(&mut trace, 1.0, 1.0, &mut once).unwrap();
        let mut twice = net.zero_grads();
        for _ in 0..2 {
            net.forward(&x, &mut trace).unwrap();
            net.bce_backward(&mut trace, 1.0, 0.5, &mut twice).unwrap();
        }
        for (a, b) in once.tensors().zip(twice.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
