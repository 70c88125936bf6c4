//! Dense 4-axis f64 tensor (batch, channels, height, width).

use crate::error::{Error, Result};

/// Row-major (batch, channels, height, width) tensor of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    data: Vec<f64>,
    dims: [usize; 4],
}

impl Tensor4 {
    pub fn zeros(dims: [usize; 4]) -> Self {
        Tensor4 {
            data: vec![0.0; dims.iter().product()],
            dims,
        }
    }

    pub fn from_vec(dims: [usize; 4], data: Vec<f64>) -> Result<Self> {
        let expect: usize = dims.iter().product();
        if data.len() != expect {
            return Err(Error::Input(format!(
                "tensor data length {} does not match dims {dims:?} ({expect})",
                data.len()
            )));
        }
        Ok(Tensor4 { data, dims })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn batch(&self) -> usize {
        self.dims[0]
    }

    pub fn channels(&self) -> usize {
        self.dims[1]
    }

    pub fn height(&self) -> usize {
        self.dims[2]
    }

    pub fn width(&self) -> usize {
        self.dims[3]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.dims[2] * self.dims[3]
    }

    /// One (batch, channel) spatial plane as a contiguous slice.
    #[inline]
    pub fn plane(&self, b: usize, c: usize) -> &[f64] {
        let len = self.plane_len();
        let start = (b * self.dims[1] + c) * len;
        &self.data[start..start + len]
    }

    #[inline]
    pub fn plane_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        let len = self.plane_len();
        let start = (b * self.dims[1] + c) * len;
        &mut self.data[start..start + len]
    }

    /// All channel planes of one batch item as a contiguous slice.
    #[inline]
    pub fn item(&self, b: usize) -> &[f64] {
        let len = self.dims[1] * self.plane_len();
        &self.data[b * len..(b + 1) * len]
    }

    #[inline]
    pub fn item_mut(&mut self, b: usize) -> &mut [f64] {
        let len = self.dims[1] * self.plane_len();
        &mut self.data[b * len..(b + 1) * len]
    }

    #[inline]
    pub fn get(&self, b: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((b * self.dims[1] + c) * self.dims[2] + y) * self.dims[3] + x]
    }

    #[inline]
    pub fn set(&mut self, b: usize, c: usize, y: usize, x: usize, v: f64) {
        self.data[((b * self.dims[1] + c) * self.dims[2] + y) * self.dims[3] + x] = v;
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Max |a - b| over all entries; shapes must match.
    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.dims, other.dims, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
