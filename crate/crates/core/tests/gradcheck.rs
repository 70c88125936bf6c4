//! Finite-difference gradient checks for every layer primitive.
//!
//! Each check perturbs one input or parameter coordinate at a time and
//! compares the analytic gradient against the central-difference quotient.

mod common;

use common::{assert_gradients_close, dot, numerical_gradient, random_tensor};
use srce_core::nn::{mse_loss, relu_backward, relu_forward, ConvLayer, Tensor4};

const REL_TOL: f64 = 1e-6;
const ABS_TOL: f64 = 1e-9;

/// Gradient of sum(forward(x) .* probe) with respect to x, kernel, and bias.
fn check_conv_layer(mut layer: ConvLayer, input_dims: [usize; 4], seed: u64, what: &str) {
    use rand::Rng;
    let mut rng = srce_core::seeds::rng(seed);
    for w in layer.kernel.iter_mut() {
        *w = rng.gen::<f64>() * 2.0 - 1.0;
    }
    for b in layer.bias.iter_mut() {
        *b = rng.gen::<f64>() - 0.5;
    }
    let mut input = random_tensor(input_dims, seed + 1);
    let out_dims = [
        input_dims[0],
        layer.out_channels(),
        input_dims[2],
        input_dims[3],
    ];
    let probe = random_tensor(out_dims, seed + 2);

    let grads = layer.backward(&input, &probe, true).unwrap();

    // Input gradient.
    let data = input.as_mut_slice().to_vec();
    let mut params = data.clone();
    let numeric = numerical_gradient(&mut params, |p| {
        let x = Tensor4::from_vec(input_dims, p.to_vec()).unwrap();
        dot(&layer.forward(&x).unwrap(), &probe)
    });
    assert_gradients_close(
        grads.grad_input.as_ref().unwrap().as_slice(),
        &numeric,
        REL_TOL,
        ABS_TOL,
        &format!("{what}: grad_input"),
    );

    // Kernel gradient.
    let mut kernel = layer.kernel.clone();
    let numeric = numerical_gradient(&mut kernel, |k| {
        let mut l = layer.clone();
        l.kernel.copy_from_slice(k);
        dot(&l.forward(&input).unwrap(), &probe)
    });
    assert_gradients_close(
        &grads.grad_kernel,
        &numeric,
        REL_TOL,
        ABS_TOL,
        &format!("{what}: grad_kernel"),
    );

    // Bias gradient.
    let mut bias = layer.bias.clone();
    let numeric = numerical_gradient(&mut bias, |b| {
        let mut l = layer.clone();
        l.bias.copy_from_slice(b);
        dot(&l.forward(&input).unwrap(), &probe)
    });
    assert_gradients_close(
        &grads.grad_bias,
        &numeric,
        REL_TOL,
        ABS_TOL,
        &format!("{what}: grad_bias"),
    );
}

#[test]
fn conv_3x3_gradients_match_finite_differences() {
    check_conv_layer(
        ConvLayer::conv(4, 3, 3, 3).unwrap(),
        [2, 3, 5, 5],
        100,
        "conv 3x3",
    );
}

#[test]
fn conv_1x1_and_5x5_gradients() {
    check_conv_layer(
        ConvLayer::conv(6, 2, 1, 1).unwrap(),
        [2, 2, 4, 6],
        200,
        "conv 1x1",
    );
    check_conv_layer(
        ConvLayer::conv(1, 5, 5, 5).unwrap(),
        [1, 5, 7, 6],
        300,
        "conv 5x5 single-out",
    );
}

#[test]
fn deconv_gradients_match_finite_differences() {
    check_conv_layer(
        ConvLayer::deconv(3, 2, 3, 3).unwrap(),
        [2, 3, 5, 4],
        400,
        "deconv 3x3",
    );
    check_conv_layer(
        ConvLayer::deconv(5, 1, 5, 5).unwrap(),
        [1, 5, 9, 6],
        500,
        "deconv 5x5 single-out",
    );
}

#[test]
fn relu_gradient_away_from_kink() {
    // Exclude |x| < 1e-3: the subgradient at 0 is a convention, not a limit.
    let mut input = random_tensor([1, 2, 6, 6], 600);
    for v in input.as_mut_slice() {
        if v.abs() < 1e-3 {
            *v = 0.1;
        }
    }
    let probe = random_tensor([1, 2, 6, 6], 601);
    let analytic = relu_backward(&input, &probe);
    let dims = input.dims();
    let mut data = input.as_slice().to_vec();
    let numeric = numerical_gradient(&mut data, |p| {
        let x = Tensor4::from_vec(dims, p.to_vec()).unwrap();
        dot(&relu_forward(&x), &probe)
    });
    assert_gradients_close(analytic.as_slice(), &numeric, REL_TOL, ABS_TOL, "relu");
}

#[test]
fn mse_gradient_matches_finite_differences() {
    let pred = random_tensor([3, 1, 4, 4], 700);
    let target = random_tensor([3, 1, 4, 4], 701);
    let (_, analytic) = mse_loss(&pred, &target).unwrap();
    let dims = pred.dims();
    let mut data = pred.as_slice().to_vec();
    let numeric = numerical_gradient(&mut data, |p| {
        let x = Tensor4::from_vec(dims, p.to_vec()).unwrap();
        mse_loss(&x, &target).unwrap().0
    });
    assert_gradients_close(analytic.as_slice(), &numeric, 1e-8, 1e-12, "mse");
}
