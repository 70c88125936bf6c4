//! Layer composition: forward with activation cache, exact backward, and
//! the per-parameter Adam update.

use crate::error::{Error, Result};
use crate::nn::adam::{adam_step, AdamState};
use crate::nn::conv::{ConvGrads, ConvLayer};
use crate::nn::ops::{relu_backward, relu_forward};
use crate::nn::tensor::Tensor4;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    Relu,
}

/// Ordered layer stack. All spatial maps are same-size, so any N x M input
/// at least as large as the kernels flows through unchanged in shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub layers: Vec<Layer>,
}

/// Per-layer inputs captured during the forward pass; consumed by backward.
pub struct ForwardCache {
    inputs: Vec<Tensor4>,
    output: Tensor4,
}

impl ForwardCache {
    pub fn output(&self) -> &Tensor4 {
        &self.output
    }

    pub fn into_output(self) -> Tensor4 {
        self.output
    }
}

/// Kernel/bias gradients for each conv layer (None for activations).
pub struct ModelGrads {
    pub layers: Vec<Option<ConvGrads>>,
}

/// Adam moments for every conv layer's kernel and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptimizer {
    states: Vec<Option<(AdamState, AdamState)>>,
}

impl Model {
    pub fn new(layers: Vec<Layer>) -> Self {
        Model { layers }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv(c) => c.parameter_count(),
                Layer::Relu => 0,
            })
            .sum()
    }

    pub fn conv_layers(&self) -> impl Iterator<Item = &ConvLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Conv(c) => Some(c),
            Layer::Relu => None,
        })
    }

    /// Forward pass without keeping activations.
    pub fn forward(&self, input: &Tensor4) -> Result<Tensor4> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = match layer {
                Layer::Conv(c) => c.forward(&x)?,
                Layer::Relu => relu_forward(&x),
            };
        }
        Ok(x)
    }

    /// Forward pass recording each layer's input for the backward pass.
    pub fn forward_cached(&self, input: &Tensor4) -> Result<ForwardCache> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let next = match layer {
                Layer::Conv(c) => c.forward(&x)?,
                Layer::Relu => relu_forward(&x),
            };
            inputs.push(std::mem::replace(&mut x, next));
        }
        Ok(ForwardCache { inputs, output: x })
    }

    /// Backpropagate `grad_out` through the stack, producing all parameter
    /// gradients. The gradient with respect to the model input is computed
    /// only when `need_input_grad` is set.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_out: &Tensor4,
        need_input_grad: bool,
    ) -> Result<(ModelGrads, Option<Tensor4>)> {
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::Input("forward cache does not match model".into()));
        }
        let mut grads: Vec<Option<ConvGrads>> = (0..self.layers.len()).map(|_| None).collect();
        let mut g = grad_out.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[idx];
            match layer {
                Layer::Conv(c) => {
                    let need_upstream = idx > 0 || need_input_grad;
                    let mut lg = c.backward(input, &g, need_upstream)?;
                    if let Some(gi) = lg.grad_input.take() {
                        g = gi;
                    } else {
                        // First layer with no input grad requested: done.
                        grads[idx] = Some(lg);
                        return Ok((ModelGrads { layers: grads }, None));
                    }
                    grads[idx] = Some(lg);
                }
                Layer::Relu => {
                    g = relu_backward(input, &g);
                }
            }
        }
        let input_grad = need_input_grad.then_some(g);
        Ok((ModelGrads { layers: grads }, input_grad))
    }
}

impl ModelOptimizer {
    pub fn new(model: &Model) -> Self {
        ModelOptimizer {
            states: model
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Conv(c) => {
                        Some((AdamState::new(c.kernel.len()), AdamState::new(c.bias.len())))
                    }
                    Layer::Relu => None,
                })
                .collect(),
        }
    }

    /// Apply one Adam step to every conv layer. Errors carry the layer index.
    pub fn step(&mut self, model: &mut Model, grads: &ModelGrads, lr: f64) -> Result<()> {
        if grads.layers.len() != model.layers.len() {
            return Err(Error::Input("gradient set does not match model".into()));
        }
        for (idx, layer) in model.layers.iter_mut().enumerate() {
            let Layer::Conv(c) = layer else { continue };
            let Some(lg) = &grads.layers[idx] else {
                return Err(Error::Input(format!("missing gradients for layer {idx}")));
            };
            let (ks, bs) = self.states[idx]
                .as_mut()
                .expect("optimizer built for this model");
            adam_step(&mut c.kernel, &lg.grad_kernel, ks, lr)
                .map_err(|e| Error::Numeric(format!("layer {idx} kernel: {e}")))?;
            adam_step(&mut c.bias, &lg.grad_bias, bs, lr)
                .map_err(|e| Error::Numeric(format!("layer {idx} bias: {e}")))?;
        }
        Ok(())
    }
}
