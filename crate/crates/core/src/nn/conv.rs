//! 2-D convolution and transposed convolution, stride 1, "same" zero padding.
//!
//! The numerical definition is the reference nested loop in
//! [`crate::nn::reference`]; this module lowers the same maps to
//! matrix-multiply form (im2col + GEMM) where the output-channel count
//! amortizes the column buffer, and to direct shift-and-accumulate loops
//! where it does not. Results agree with the reference within floating-point
//! reassociation.

use rand::Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor4;
use crate::seeds;

/// Below this output-channel count im2col stops paying for itself.
const GEMM_MIN_CHANNELS: usize = 8;

/// Convolution or transposed-convolution layer.
///
/// `kdims` stores the kernel in its convolution orientation
/// `[a, b, kh, kw]`: a standard layer maps `b -> a` channels, a transposed
/// layer is the adjoint map `a -> b` of the same kernel. Biases are per
/// output channel of the layer's own map.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub kernel: Vec<f64>,
    pub kdims: [usize; 4],
    pub bias: Vec<f64>,
    pub transposed: bool,
}

impl ConvLayer {
    /// Standard convolution mapping `in_channels -> out_channels`.
    pub fn conv(out_channels: usize, in_channels: usize, kh: usize, kw: usize) -> Result<Self> {
        Self::validate_kernel(kh, kw)?;
        Ok(ConvLayer {
            kernel: vec![0.0; out_channels * in_channels * kh * kw],
            kdims: [out_channels, in_channels, kh, kw],
            bias: vec![0.0; out_channels],
            transposed: false,
        })
    }

    /// Transposed convolution mapping `in_channels -> out_channels`.
    pub fn deconv(in_channels: usize, out_channels: usize, kh: usize, kw: usize) -> Result<Self> {
        Self::validate_kernel(kh, kw)?;
        Ok(ConvLayer {
            kernel: vec![0.0; in_channels * out_channels * kh * kw],
            kdims: [in_channels, out_channels, kh, kw],
            bias: vec![0.0; out_channels],
            transposed: true,
        })
    }

    fn validate_kernel(kh: usize, kw: usize) -> Result<()> {
        if kh % 2 == 0 || kw % 2 == 0 || kh == 0 || kw == 0 {
            return Err(Error::Config(format!(
                "kernel sides must be odd for same padding, got {kh}x{kw}"
            )));
        }
        Ok(())
    }

    pub fn in_channels(&self) -> usize {
        if self.transposed {
            self.kdims[0]
        } else {
            self.kdims[1]
        }
    }

    pub fn out_channels(&self) -> usize {
        if self.transposed {
            self.kdims[1]
        } else {
            self.kdims[0]
        }
    }

    pub fn kernel_size(&self) -> (usize, usize) {
        (self.kdims[2], self.kdims[3])
    }

    pub fn parameter_count(&self) -> usize {
        self.kernel.len() + self.bias.len()
    }

    /// He initialization: kernel ~ N(0, 2 / (in_channels * kh * kw)),
    /// bias zero. Deterministic per seed.
    pub fn he_init(&mut self, seed: u64) {
        let (kh, kw) = self.kernel_size();
        let fan_in = self.in_channels() * kh * kw;
        let std = (2.0 / fan_in as f64).sqrt();
        let normal = Normal::new(0.0, std).expect("valid std");
        let mut rng = seeds::rng(seed);
        for w in self.kernel.iter_mut() {
            *w = rng.sample(normal);
        }
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    /// Kernel reindexed for the opposite map direction: channel axes
    /// swapped, spatial taps flipped. The cross-correlation with the
    /// flipped kernel realizes the adjoint of the original map.
    fn flipped_kernel(&self) -> Vec<f64> {
        let [a, b, kh, kw] = self.kdims;
        let mut out = vec![0.0; self.kernel.len()];
        for i in 0..a {
            for j in 0..b {
                for dy in 0..kh {
                    for dx in 0..kw {
                        out[((j * a + i) * kh + (kh - 1 - dy)) * kw + (kw - 1 - dx)] =
                            self.kernel[((i * b + j) * kh + dy) * kw + dx];
                    }
                }
            }
        }
        out
    }

    fn check_input(&self, input: &Tensor4) -> Result<()> {
        if input.channels() != self.in_channels() {
            return Err(Error::Input(format!(
                "layer expects {} input channels, got {}",
                self.in_channels(),
                input.channels()
            )));
        }
        Ok(())
    }

    /// Same-size forward map plus bias.
    pub fn forward(&self, input: &Tensor4) -> Result<Tensor4> {
        self.check_input(input)?;
        let [a, b, kh, kw] = self.kdims;
        let out = if self.transposed {
            // Adjoint realized as correlation with the flipped kernel.
            correlate(input, &self.flipped_kernel(), b, a, kh, kw, Some(&self.bias))
        } else {
            correlate(input, &self.kernel, a, b, kh, kw, Some(&self.bias))
        };
        Ok(out)
    }

    /// Exact analytic gradients of [`Self::forward`]. `grad_input` is
    /// computed only when requested (the first layer of a model does not
    /// need it during training).
    pub fn backward(
        &self,
        input: &Tensor4,
        grad_out: &Tensor4,
        need_grad_input: bool,
    ) -> Result<ConvGrads> {
        self.check_input(input)?;
        if grad_out.channels() != self.out_channels()
            || grad_out.batch() != input.batch()
            || grad_out.height() != input.height()
            || grad_out.width() != input.width()
        {
            return Err(Error::Input(format!(
                "grad_out dims {:?} inconsistent with input {:?} and {} output channels",
                grad_out.dims(),
                input.dims(),
                self.out_channels()
            )));
        }
        let [a, b, kh, kw] = self.kdims;

        let grad_bias: Vec<f64> = (0..self.out_channels())
            .map(|oc| {
                (0..grad_out.batch())
                    .map(|item| grad_out.plane(item, oc).iter().sum::<f64>())
                    .sum()
            })
            .collect();

        let (grad_kernel, grad_input);
        if self.transposed {
            // Forward was correlate(x, flip(K)); the kernel gradient comes
            // out in flipped orientation and is unmapped afterwards.
            let gk_flipped = kernel_gradient(input, grad_out, b, a, kh, kw);
            grad_kernel = unflip_kernel(&gk_flipped, b, a, kh, kw);
            grad_input = need_grad_input
                .then(|| correlate(grad_out, &self.kernel, a, b, kh, kw, None));
        } else {
            grad_kernel = kernel_gradient(input, grad_out, a, b, kh, kw);
            grad_input = need_grad_input
                .then(|| correlate(grad_out, &self.flipped_kernel(), b, a, kh, kw, None));
        }
        Ok(ConvGrads {
            grad_input,
            grad_kernel,
            grad_bias,
        })
    }
}

/// Gradients of one convolution layer.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub grad_input: Option<Tensor4>,
    pub grad_kernel: Vec<f64>,
    pub grad_bias: Vec<f64>,
}

/// Invert the axis swap and spatial flip applied by `flipped_kernel`:
/// given gradients in `[b, a, kh, kw]` flipped layout, return `[a, b, kh, kw]`.
fn unflip_kernel(flipped: &[f64], b: usize, a: usize, kh: usize, kw: usize) -> Vec<f64> {
    let mut out = vec![0.0; flipped.len()];
    for j in 0..b {
        for i in 0..a {
            for dy in 0..kh {
                for dx in 0..kw {
                    out[((i * b + j) * kh + (kh - 1 - dy)) * kw + (kw - 1 - dx)] =
                        flipped[((j * a + i) * kh + dy) * kw + dx];
                }
            }
        }
    }
    out
}

/// Same-padding stride-1 cross-correlation of every batch item with a
/// kernel matrix in `(oc, ic * kh * kw)` row-major layout.
fn correlate(
    input: &Tensor4,
    kmat: &[f64],
    oc: usize,
    ic: usize,
    kh: usize,
    kw: usize,
    bias: Option<&[f64]>,
) -> Tensor4 {
    let [batch, _, h, w] = input.dims();
    let mut out = Tensor4::zeros([batch, oc, h, w]);
    if kh == 1 && kw == 1 {
        // 1x1 kernels are a plain channel-mixing GEMM per item.
        let hw = h * w;
        for item in 0..batch {
            gemm(oc, ic, hw, kmat, input.item(item), 0.0, out.item_mut(item));
        }
    } else if oc >= GEMM_MIN_CHANNELS {
        let mut col = vec![0.0; ic * kh * kw * h * w];
        for item in 0..batch {
            im2col(input.item(item), ic, h, w, kh, kw, &mut col);
            gemm(oc, ic * kh * kw, h * w, kmat, &col, 0.0, out.item_mut(item));
        }
    } else {
        let mut scratch = Kn2rowScratch::new(ic, h, w, kh, kw);
        for item in 0..batch {
            kn2row(input.item(item), kmat, oc, ic, h, w, kh, kw, &mut scratch, out.item_mut(item));
        }
    }
    if let Some(bias) = bias {
        for item in 0..batch {
            for (c, &b) in bias.iter().enumerate() {
                out.plane_mut(item, c).iter_mut().for_each(|v| *v += b);
            }
        }
    }
    out
}

/// d loss / d kernel for the correlation map, `(oc, ic * kh * kw)` layout,
/// summed over the batch. Lowered to GEMM with the larger channel count as
/// the row dimension: either GO x col(input)^T directly, or
/// input x col(GO)^T followed by an index reorder.
fn kernel_gradient(
    input: &Tensor4,
    grad_out: &Tensor4,
    oc: usize,
    ic: usize,
    kh: usize,
    kw: usize,
) -> Vec<f64> {
    let [batch, _, h, w] = input.dims();
    let mut gk = vec![0.0; oc * ic * kh * kw];
    if kh == 1 && kw == 1 {
        for item in 0..batch {
            gemm_bt(oc, h * w, ic, grad_out.item(item), input.item(item), 1.0, &mut gk);
        }
    } else if oc >= ic {
        let mut col = vec![0.0; ic * kh * kw * h * w];
        for item in 0..batch {
            im2col(input.item(item), ic, h, w, kh, kw, &mut col);
            gemm_bt(oc, h * w, ic * kh * kw, grad_out.item(item), &col, 1.0, &mut gk);
        }
    } else {
        // gk[o][c][dy][dx] = sum_px x[c][px] * go[o][px shifted by the
        // flipped tap], i.e. input times the im2col of grad_out.
        let mut col = vec![0.0; oc * kh * kw * h * w];
        let mut acc = vec![0.0; ic * oc * kh * kw];
        for item in 0..batch {
            im2col(grad_out.item(item), oc, h, w, kh, kw, &mut col);
            gemm_bt(ic, h * w, oc * kh * kw, input.item(item), &col, 1.0, &mut acc);
        }
        for c in 0..ic {
            for o in 0..oc {
                for dy in 0..kh {
                    for dx in 0..kw {
                        gk[((o * ic + c) * kh + dy) * kw + dx] = acc[(c * oc + o) * kh * kw
                            + (kh - 1 - dy) * kw
                            + (kw - 1 - dx)];
                    }
                }
            }
        }
    }
    gk
}

/// Buffers reused across items by the small-channel correlation path.
struct Kn2rowScratch {
    /// One kernel row per tap: (kh * kw) x ic.
    kmat_taps: Vec<f64>,
    /// GEMM output, one collapsed plane per tap: (kh * kw) x (h * w).
    tap_planes: Vec<f64>,
    /// Padded accumulator indexed so out[y][x] = acc[y + ph][x + pw].
    acc: Vec<f64>,
}

impl Kn2rowScratch {
    fn new(ic: usize, h: usize, w: usize, kh: usize, kw: usize) -> Self {
        Kn2rowScratch {
            kmat_taps: vec![0.0; kh * kw * ic],
            tap_planes: vec![0.0; kh * kw * h * w],
            acc: vec![0.0; (h + kh - 1) * (w + kw - 1)],
        }
    }
}

/// Correlation for few output channels: one (taps x ic) x (ic x hw) GEMM
/// collapses the channels for every tap at once, then each tap plane is
/// shift-added into a padded accumulator.
#[allow(clippy::too_many_arguments)]
fn kn2row(
    item: &[f64],
    kmat: &[f64],
    oc: usize,
    ic: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    scratch: &mut Kn2rowScratch,
    out: &mut [f64],
) {
    let (ph, pw) = ((kh - 1) / 2, (kw - 1) / 2);
    let padded_w = w + kw - 1;
    let hw = h * w;
    let taps = kh * kw;
    for o in 0..oc {
        for t in 0..taps {
            for c in 0..ic {
                scratch.kmat_taps[t * ic + c] = kmat[(o * ic + c) * taps + t];
            }
        }
        gemm(taps, ic, hw, &scratch.kmat_taps, item, 0.0, &mut scratch.tap_planes);
        scratch.acc.fill(0.0);
        for dy in 0..kh {
            for dx in 0..kw {
                // Input pixel (u, v) contributes to out[u - dy + ph][v - dx + pw].
                let (oy, ox) = (kh - 1 - dy, kw - 1 - dx);
                let plane = &scratch.tap_planes[(dy * kw + dx) * hw..][..hw];
                for y in 0..h {
                    let dst = &mut scratch.acc[(y + oy) * padded_w + ox..][..w];
                    let src = &plane[y * w..(y + 1) * w];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += s;
                    }
                }
            }
        }
        let dst = &mut out[o * hw..(o + 1) * hw];
        for y in 0..h {
            dst[y * w..(y + 1) * w]
                .copy_from_slice(&scratch.acc[(y + ph) * padded_w + pw..][..w]);
        }
    }
}

/// Write the im2col matrix: row (c * kh + dy) * kw + dx holds the input
/// plane shifted by (dy - ph, dx - pw), zero outside.
fn im2col(item: &[f64], ic: usize, h: usize, w: usize, kh: usize, kw: usize, col: &mut [f64]) {
    let (ph, pw) = ((kh - 1) / 2, (kw - 1) / 2);
    let hw = h * w;
    for c in 0..ic {
        let plane = &item[c * hw..(c + 1) * hw];
        for dy in 0..kh {
            for dx in 0..kw {
                let row = &mut col[((c * kh + dy) * kw + dx) * hw..][..hw];
                // Source x range that stays inside the plane for this dx.
                let x0 = pw.saturating_sub(dx);
                let x1 = (w + pw - dx).min(w);
                for y in 0..h {
                    let dst = &mut row[y * w..(y + 1) * w];
                    let sy = y + dy;
                    if sy < ph || sy >= h + ph || x0 >= x1 {
                        dst.fill(0.0);
                        continue;
                    }
                    let sy = sy - ph;
                    dst[..x0].fill(0.0);
                    dst[x1..].fill(0.0);
                    let src_x0 = x0 + dx - pw;
                    dst[x0..x1].copy_from_slice(&plane[sy * w + src_x0..sy * w + src_x0 + (x1 - x0)]);
                }
            }
        }
    }
}

/// C (m x n) = alpha A (m x k) B (k x n) + beta C, all row-major.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// C (m x n) = A (m x k) B^T (n x k rows) + beta C, all row-major.
fn gemm_bt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            1,
            k as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::reference;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_tensor(dims: [usize; 4], seed: u64) -> Tensor4 {
        let mut rng = seeds::rng(seed);
        let data = (0..dims.iter().product::<usize>())
            .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        Tensor4::from_vec(dims, data).unwrap()
    }

    fn random_layer(layer: &mut ConvLayer, seed: u64) {
        let mut rng = seeds::rng(seed);
        for w in layer.kernel.iter_mut() {
            *w = rng.gen::<f64>() * 2.0 - 1.0;
        }
        for b in layer.bias.iter_mut() {
            *b = rng.gen::<f64>() * 0.5;
        }
    }

    #[test]
    fn identity_1x1_conv() {
        let mut layer = ConvLayer::conv(1, 1, 1, 1).unwrap();
        layer.kernel[0] = 1.0;
        let x = random_tensor([2, 1, 5, 4], 1);
        let y = layer.forward(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn all_ones_3x3_on_all_ones_input() {
        // Hand-counted overlaps: corners 4, edge centers 6, center 9.
        let mut layer = ConvLayer::conv(1, 1, 3, 3).unwrap();
        layer.kernel.iter_mut().for_each(|w| *w = 1.0);
        let x = Tensor4::from_vec([1, 1, 3, 3], vec![1.0; 9]).unwrap();
        let y = layer.forward(&x).unwrap();
        let want = [4.0, 6.0, 4.0, 6.0, 9.0, 6.0, 4.0, 6.0, 4.0];
        for (a, b) in y.as_slice().iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn same_padding_preserves_shape() {
        let mut layer = ConvLayer::conv(3, 2, 9, 9).unwrap();
        layer.he_init(3);
        let x = random_tensor([2, 2, 64, 20], 4);
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.dims(), [2, 3, 64, 20]);
    }

    #[test]
    fn rejects_even_kernel_and_channel_mismatch() {
        assert!(ConvLayer::conv(1, 1, 2, 3).is_err());
        let layer = ConvLayer::conv(1, 3, 3, 3).unwrap();
        let x = random_tensor([1, 2, 5, 5], 5);
        assert!(layer.forward(&x).is_err());
    }

    #[test]
    fn matches_reference_on_all_paths() {
        // Covers 1x1 GEMM, im2col GEMM (oc >= 8), and the direct path.
        for (oc, ic, k, seed) in [(1, 32, 5, 10), (12, 12, 3, 11), (8, 3, 3, 12), (2, 2, 1, 13)] {
            let mut layer = ConvLayer::conv(oc, ic, k, k).unwrap();
            random_layer(&mut layer, seed);
            let x = random_tensor([2, ic, 10, 7], seed + 100);
            let fast = layer.forward(&x).unwrap();
            let slow = reference::conv_forward(&x, &layer);
            assert!(
                fast.max_abs_diff(&slow) < 1e-12,
                "path oc={oc} ic={ic} k={k} diverges from reference"
            );
        }
    }

    #[test]
    fn deconv_matches_reference() {
        for (ic, oc, k, seed) in [(56, 1, 9, 20), (3, 8, 3, 21), (2, 2, 1, 22)] {
            let mut layer = ConvLayer::deconv(ic, oc, k, k).unwrap();
            random_layer(&mut layer, seed);
            let x = random_tensor([2, ic, 11, 9], seed + 100);
            let fast = layer.forward(&x).unwrap();
            let slow = reference::conv_forward(&x, &layer);
            assert!(fast.max_abs_diff(&slow) < 1e-12, "deconv {ic}->{oc} k={k}");
        }
    }

    #[test]
    fn deconv_1x1_is_scalar_map() {
        let mut layer = ConvLayer::deconv(1, 1, 1, 1).unwrap();
        layer.kernel[0] = -2.5;
        layer.bias[0] = 0.75;
        let x = random_tensor([1, 1, 4, 4], 30);
        let y = layer.forward(&x).unwrap();
        for (a, b) in y.as_slice().iter().zip(x.as_slice()) {
            assert_relative_eq!(*a, -2.5 * b + 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn deconv_shape_contract() {
        let mut layer = ConvLayer::deconv(56, 1, 9, 9).unwrap();
        layer.he_init(1);
        let x = random_tensor([1, 56, 64, 20], 2);
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.dims(), [1, 1, 64, 20]);
    }

    #[test]
    fn adjoint_identity_dense_oracle() {
        // <deconv(x), y> = <x, conv(y)> for the same kernel, zero bias.
        // Oracle: dense matrices of both maps on a 6x6 grid.
        let mut conv = ConvLayer::conv(2, 3, 3, 3).unwrap();
        random_layer(&mut conv, 40);
        conv.bias.iter_mut().for_each(|b| *b = 0.0);
        let mut deconv = ConvLayer {
            kernel: conv.kernel.clone(),
            kdims: conv.kdims,
            bias: vec![0.0; 3],
            transposed: true,
        };
        deconv.bias.iter_mut().for_each(|b| *b = 0.0);

        let (h, w) = (6, 6);
        let dim_in = 2 * h * w; // deconv input / conv output channels = 2
        let dim_out = 3 * h * w;
        let mut m_deconv = vec![vec![0.0; dim_in]; dim_out];
        for j in 0..dim_in {
            let mut e = Tensor4::zeros([1, 2, h, w]);
            e.as_mut_slice()[j] = 1.0;
            let out = deconv.forward(&e).unwrap();
            for (i, row) in m_deconv.iter_mut().enumerate() {
                row[j] = out.as_slice()[i];
            }
        }
        let mut m_conv = vec![vec![0.0; dim_out]; dim_in];
        for j in 0..dim_out {
            let mut e = Tensor4::zeros([1, 3, h, w]);
            e.as_mut_slice()[j] = 1.0;
            let out = conv.forward(&e).unwrap();
            for (i, row) in m_conv.iter_mut().enumerate() {
                row[j] = out.as_slice()[i];
            }
        }
        for i in 0..dim_out {
            for j in 0..dim_in {
                assert!(
                    (m_deconv[i][j] - m_conv[j][i]).abs() < 1e-12,
                    "transpose mismatch at ({i},{j})"
                );
            }
        }

        let x = random_tensor([1, 2, h, w], 41);
        let y = random_tensor([1, 3, h, w], 42);
        let lhs: f64 = deconv
            .forward(&x)
            .unwrap()
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        let rhs: f64 = x
            .as_slice()
            .iter()
            .zip(conv.forward(&y).unwrap().as_slice())
            .map(|(a, b)| a * b)
            .sum();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn backward_zero_grad_gives_zero() {
        let mut layer = ConvLayer::conv(4, 3, 3, 3).unwrap();
        random_layer(&mut layer, 50);
        let x = random_tensor([2, 3, 6, 5], 51);
        let go = Tensor4::zeros([2, 4, 6, 5]);
        let grads = layer.backward(&x, &go, true).unwrap();
        assert!(grads.grad_kernel.iter().all(|&g| g == 0.0));
        assert!(grads.grad_bias.iter().all(|&g| g == 0.0));
        assert!(grads.grad_input.unwrap().as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_identity_kernel_passes_gradient() {
        let mut layer = ConvLayer::conv(1, 1, 1, 1).unwrap();
        layer.kernel[0] = 1.0;
        let x = random_tensor([1, 1, 5, 5], 52);
        let go = random_tensor([1, 1, 5, 5], 53);
        let grads = layer.backward(&x, &go, true).unwrap();
        assert_eq!(grads.grad_input.unwrap(), go);
    }

    #[test]
    fn he_init_statistics_and_determinism() {
        let mut layer = ConvLayer::conv(64, 9, 9, 9).unwrap();
        layer.he_init(7);
        assert!(layer.bias.iter().all(|&b| b == 0.0));
        let fan_in = (9 * 9 * 9) as f64;
        let var = layer.kernel.iter().map(|w| w * w).sum::<f64>() / layer.kernel.len() as f64;
        assert!(
            (var - 2.0 / fan_in).abs() < 0.1 * (2.0 / fan_in),
            "sample variance {var} vs expected {}",
            2.0 / fan_in
        );
        let mut again = ConvLayer::conv(64, 9, 9, 9).unwrap();
        again.he_init(7);
        assert_eq!(layer.kernel, again.kernel);
    }
}
