//! Pointwise activation and loss.

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor4;

/// y = max(x, 0).
pub fn relu_forward(x: &Tensor4) -> Tensor4 {
    let mut out = x.clone();
    out.as_mut_slice().iter_mut().for_each(|v| {
        if *v < 0.0 {
            *v = 0.0;
        }
    });
    out
}

/// Gradient passthrough where x > 0; the subgradient at 0 is taken as 0.
pub fn relu_backward(x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
    assert_eq!(x.dims(), grad_out.dims(), "shape mismatch");
    let mut out = grad_out.clone();
    for (g, &v) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

/// Batch-normalized squared error: loss = sum((pred - target)^2) / batch,
/// gradient 2 (pred - target) / batch.
pub fn mse_loss(pred: &Tensor4, target: &Tensor4) -> Result<(f64, Tensor4)> {
    if pred.dims() != target.dims() {
        return Err(Error::Input(format!(
            "loss shape mismatch: {:?} vs {:?}",
            pred.dims(),
            target.dims()
        )));
    }
    let batch = pred.batch() as f64;
    let mut grad = Tensor4::zeros(pred.dims());
    let mut loss = 0.0;
    for ((g, &p), &t) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(pred.as_slice())
        .zip(target.as_slice())
    {
        let d = p - t;
        loss += d * d;
        *g = 2.0 * d / batch;
    }
    Ok((loss / batch, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relu_clamps_and_gates() {
        let x = Tensor4::from_vec([1, 1, 1, 3], vec![-1.0, 0.0, 2.0]).unwrap();
        let y = relu_forward(&x);
        assert_eq!(y.as_slice(), &[0.0, 0.0, 2.0]);

        let go = Tensor4::from_vec([1, 1, 1, 3], vec![1.0, 1.0, 1.0]).unwrap();
        let gi = relu_backward(&x, &go);
        assert_eq!(gi.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn relu_identity_on_positive_input() {
        let x = Tensor4::from_vec([1, 1, 2, 2], vec![0.5, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(relu_forward(&x), x);
        let go = Tensor4::from_vec([1, 1, 2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(relu_backward(&x, &go), go);
    }

    #[test]
    fn mse_zero_and_unit_difference() {
        let a = Tensor4::from_vec([1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (loss, _) = mse_loss(&a, &a).unwrap();
        assert_eq!(loss, 0.0);

        // One sample, four entries all off by one: loss 4, gradient 2.
        let b = Tensor4::from_vec([1, 1, 2, 2], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let (loss, grad) = mse_loss(&a, &b).unwrap();
        assert_relative_eq!(loss, 4.0, epsilon = 1e-15);
        for g in grad.as_slice() {
            assert_relative_eq!(*g, 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mse_rejects_shape_mismatch() {
        let a = Tensor4::zeros([1, 1, 2, 2]);
        let b = Tensor4::zeros([1, 1, 2, 3]);
        assert!(mse_loss(&a, &b).is_err());
    }
}
