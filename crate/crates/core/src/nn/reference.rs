//! Reference nested-loop convolution.
//!
//! This is the numerical definition of the layer maps. It is deliberately
//! slow and simple; tests compare the production lowering against it.

#![doc(hidden)]

use crate::nn::conv::ConvLayer;
use crate::nn::tensor::Tensor4;

/// Forward map of a (possibly transposed) layer, straight from the sums.
pub fn conv_forward(input: &Tensor4, layer: &ConvLayer) -> Tensor4 {
    let [batch, _, h, w] = input.dims();
    let [_, b, kh, kw] = layer.kdims;
    let (ph, pw) = ((kh - 1) / 2, (kw - 1) / 2);
    let oc = layer.out_channels();
    let ic = layer.in_channels();
    let mut out = Tensor4::zeros([batch, oc, h, w]);
    let sample = |t: &Tensor4, item: usize, c: usize, y: isize, x: isize| -> f64 {
        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
            0.0
        } else {
            t.get(item, c, y as usize, x as usize)
        }
    };
    for item in 0..batch {
        for o in 0..oc {
            for y in 0..h {
                for x in 0..w {
                    let mut acc = layer.bias[o];
                    for i in 0..ic {
                        for dy in 0..kh {
                            for dx in 0..kw {
                                let (ker, sy, sx) = if layer.transposed {
                                    // Adjoint of the convolution with this
                                    // kernel: gather form of the scatter sum.
                                    (
                                        layer.kernel[((i * b + o) * kh + dy) * kw + dx],
                                        y as isize - (dy as isize - ph as isize),
                                        x as isize - (dx as isize - pw as isize),
                                    )
                                } else {
                                    (
                                        layer.kernel[((o * ic + i) * kh + dy) * kw + dx],
                                        y as isize + dy as isize - ph as isize,
                                        x as isize + dx as isize - pw as isize,
                                    )
                                };
                                acc += ker * sample(input, item, i, sy, sx);
                            }
                        }
                    }
                    out.set(item, o, y, x, acc);
                }
            }
        }
    }
    out
}
