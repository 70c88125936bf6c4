//! Shared oracles for the integration suites: central finite differences
//! and a tolerance helper for gradient comparisons.

#![allow(dead_code)]

use srce_core::nn::Tensor4;

pub const FD_STEP: f64 = 1e-5;

/// Central finite difference of a scalar function at every coordinate of
/// `params`.
pub fn numerical_gradient(params: &mut [f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let saved = params[i];
        params[i] = saved + FD_STEP;
        let plus = f(params);
        params[i] = saved - FD_STEP;
        let minus = f(params);
        params[i] = saved;
        grad[i] = (plus - minus) / (2.0 * FD_STEP);
    }
    grad
}

/// Passes when |a - n| <= abs_tol + rel_tol * max(|a|, |n|) everywhere.
/// Returns the worst relative error for reporting.
pub fn assert_gradients_close(
    analytic: &[f64],
    numeric: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    what: &str,
) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "{what}: length mismatch");
    let mut worst = 0.0f64;
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        let err = (a - n).abs();
        assert!(
            err <= abs_tol + rel_tol * scale,
            "{what}: coordinate {i}: analytic {a} vs numeric {n} (err {err})"
        );
        if scale > abs_tol {
            worst = worst.max(err / scale.max(1e-300));
        }
    }
    worst
}

pub fn random_tensor(dims: [usize; 4], seed: u64) -> Tensor4 {
    use rand::Rng;
    let mut rng = srce_core::seeds::rng(seed);
    let data = (0..dims.iter().product::<usize>())
        .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
        .collect();
    Tensor4::from_vec(dims, data).unwrap()
}

/// Sum of elementwise products, the test scalarizer for map gradients.
pub fn dot(a: &Tensor4, b: &Tensor4) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}
