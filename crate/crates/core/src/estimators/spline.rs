//! Cubic spline interpolation with the not-a-knot boundary condition.
//!
//! Not-a-knot makes the spline reproduce polynomials up to degree three
//! exactly, which gives the interpolation tests a sharp oracle. Evaluation
//! outside the knot span extrapolates with the end pieces, matching the
//! behaviour needed for subcarriers beyond the last pilot.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Piecewise cubic through (x_i, y_i) with not-a-knot end conditions.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Fit a spline through strictly increasing knots. Requires at least
    /// four points; use [`linear_interp`] below that.
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Input("knot/value length mismatch".into()));
        }
        if n < 4 {
            return Err(Error::Input(format!(
                "not-a-knot spline needs at least 4 points, got {n}"
            )));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("knots must be strictly increasing".into()));
        }

        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);

        // Third derivative continuous across the first and last interior knot.
        a[(0, 0)] = -h[1];
        a[(0, 1)] = h[0] + h[1];
        a[(0, 2)] = -h[0];
        a[(n - 1, n - 3)] = -h[n - 2];
        a[(n - 1, n - 2)] = h[n - 3] + h[n - 2];
        a[(n - 1, n - 1)] = -h[n - 3];

        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1];
            a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
            a[(i, i + 1)] = h[i];
            b[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }

        let moments = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numeric("singular spline system".into()))?;
        Ok(CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            moments: moments.iter().copied().collect(),
        })
    }

    /// Evaluate the spline; points outside the knot span use the end pieces.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        // Index of the piece covering t (clamped for extrapolation).
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(idx) => idx.min(n - 2),
            Err(idx) => idx.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let dl = self.x[i + 1] - t;
        let dr = t - self.x[i];
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        m0 * dl * dl * dl / (6.0 * h)
            + m1 * dr * dr * dr / (6.0 * h)
            + (self.y[i] - m0 * h * h / 6.0) * dl / h
            + (self.y[i + 1] - m1 * h * h / 6.0) * dr / h
    }
}

/// Piecewise linear interpolation with end-segment extrapolation.
pub fn linear_interp(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    debug_assert!(n >= 2);
    let i = match x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(idx) => idx.min(n - 2),
        Err(idx) => idx.saturating_sub(1).min(n - 2),
    };
    let w = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + w * (y[i + 1] - y[i])
}
