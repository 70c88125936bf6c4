//! Minimal dense-tensor network engine: 2-D convolution, transposed
//! convolution, ReLU, batch MSE loss, exact analytic backpropagation, He
//! initialization, and Adam. Everything runs in f64 so the gradient checks
//! can use tight tolerances.

pub mod adam;
pub mod conv;
pub mod model;
pub mod ops;
pub mod reference;
pub mod tensor;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use conv::{ConvGrads, ConvLayer};
pub use model::{ForwardCache, Layer, Model, ModelGrads, ModelOptimizer};
pub use ops::{mse_loss, relu_backward, relu_forward};
pub use tensor::Tensor4;
