//! Classical pilot-aided channel estimators.
//!
//! The baseline chain is least squares at the pilot positions followed by
//! spline interpolation to all subcarriers. LMMSE filters the pilot LS
//! estimate with R (R + beta/SNR I)^-1 before the same interpolation; MMSE
//! uses the per-pilot noise weighting R (R + sigma^2 (X X^H)^-1)^-1.

pub mod spline;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ofdm::{ChannelMatrix, Constellation, OfdmFrame, PilotPattern, Snr};
use spline::{linear_interp, CubicSpline};

/// Channel estimate at the pilot subcarriers of one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimate {
    pub values: Vec<Complex64>,
    pub positions: Vec<usize>,
}

/// Empirical pilot-position channel autocorrelation R = E{h_p h_p^H}.
#[derive(Debug, Clone)]
pub struct ChannelAutocorrelation {
    pub matrix: DMatrix<Complex64>,
    pub sample_count: usize,
}

/// Constellation constant beta = E{|x|^2} E{|1/x|^2} from the LMMSE filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaConstant {
    pub value: f64,
}

/// Interpolation applied when expanding pilot estimates to all subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationKind {
    /// Not-a-knot cubic spline (linear below four pilots).
    Spline,
    /// Piecewise linear, kept for comparison runs only.
    Linear,
}

impl Default for InterpolationKind {
    fn default() -> Self {
        InterpolationKind::Spline
    }
}

/// Least-squares estimate at the pilots: elementwise Y_p / X_p.
pub fn ls_pilot_estimate(
    rx_pilots: &[Complex64],
    tx_pilots: &[Complex64],
    positions: &[usize],
) -> Result<PilotEstimate> {
    if rx_pilots.len() != tx_pilots.len() || rx_pilots.len() != positions.len() {
        return Err(Error::Input(format!(
            "pilot length mismatch: rx {}, tx {}, positions {}",
            rx_pilots.len(),
            tx_pilots.len(),
            positions.len()
        )));
    }
    if tx_pilots.iter().any(|x| x.norm_sqr() == 0.0) {
        return Err(Error::Input("zero transmitted pilot symbol".into()));
    }
    Ok(PilotEstimate {
        values: rx_pilots
            .iter()
            .zip(tx_pilots)
            .map(|(y, x)| y / x)
            .collect(),
        positions: positions.to_vec(),
    })
}

/// Expand a pilot-position estimate to all `n` subcarriers. Real and
/// imaginary parts are interpolated independently; pilot positions pass
/// through exactly. Below four pilots the spline falls back to linear.
pub fn interpolate_full(est: &PilotEstimate, n: usize) -> Result<Vec<Complex64>> {
    interpolate_full_with(est, n, InterpolationKind::Spline)
}

pub fn interpolate_full_with(
    est: &PilotEstimate,
    n: usize,
    kind: InterpolationKind,
) -> Result<Vec<Complex64>> {
    let np = est.values.len();
    if np < 2 {
        return Err(Error::Input(format!("need at least 2 pilots, got {np}")));
    }
    if est.positions.len() != np {
        return Err(Error::Input("pilot positions/values length mismatch".into()));
    }
    let x: Vec<f64> = est.positions.iter().map(|&p| p as f64).collect();
    let re: Vec<f64> = est.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = est.values.iter().map(|v| v.im).collect();

    let eval: Box<dyn Fn(f64) -> (f64, f64)> = match kind {
        InterpolationKind::Spline if np >= 4 => {
            let sr = CubicSpline::fit(&x, &re)?;
            let si = CubicSpline::fit(&x, &im)?;
            Box::new(move |t| (sr.eval(t), si.eval(t)))
        }
        _ => Box::new(move |t| (linear_interp(&x, &re, t), linear_interp(&x, &im, t))),
    };

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (r, i) = eval(k as f64);
        out.push(Complex64::new(r, i));
    }
    // Exact pass-through at the pilots.
    for (&p, &v) in est.positions.iter().zip(&est.values) {
        if p < n {
            out[p] = v;
        }
    }
    Ok(out)
}

/// beta = E{|x|^2} E{|1/x|^2} over the constellation points.
pub fn beta_constant(constellation: &Constellation) -> Result<BetaConstant> {
    if constellation.points.iter().any(|p| p.norm_sqr() == 0.0) {
        return Err(Error::Input("constellation contains the origin".into()));
    }
    let n = constellation.points.len() as f64;
    let e_sq: f64 = constellation.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
    let e_inv: f64 = constellation
        .points
        .iter()
        .map(|p| 1.0 / p.norm_sqr())
        .sum::<f64>()
        / n;
    Ok(BetaConstant { value: e_sq * e_inv })
}

/// Sample mean of h_p h_p^H over every (realization, symbol column) pair.
pub fn empirical_autocorrelation(
    channels: &[ChannelMatrix],
    pattern: &PilotPattern,
) -> Result<ChannelAutocorrelation> {
    if channels.is_empty() {
        return Err(Error::Input("no channel realizations".into()));
    }
    let np = pattern.num_pilots();
    let mut acc = DMatrix::<Complex64>::zeros(np, np);
    let mut count = 0usize;
    for ch in channels {
        for col in 0..ch.num_symbols() {
            let hp: Vec<Complex64> = pattern
                .positions
                .iter()
                .map(|&k| ch.data[(k, col)])
                .collect();
            for i in 0..np {
                for j in 0..np {
                    acc[(i, j)] += hp[i] * hp[j].conj();
                }
            }
            count += 1;
        }
    }
    let scale = 1.0 / count as f64;
    acc.iter_mut().for_each(|v| *v *= scale);
    Ok(ChannelAutocorrelation {
        matrix: acc,
        sample_count: count,
    })
}

/// Compute R A^-1 by solving A^T W^T = R^T with partial-pivot LU.
fn right_divide(r: &DMatrix<Complex64>, a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let lu = a.transpose().lu();
    let wt = lu
        .solve(&r.transpose())
        .ok_or_else(|| Error::Numeric("singular estimator filter system".into()))?;
    Ok(wt.transpose())
}

/// Precomputed pilot-domain filter W = R (R + c I)^-1 or its MMSE variant.
/// Build once per (R, regularizer) and reuse across frames and columns.
#[derive(Debug, Clone)]
pub struct PilotFilter {
    w: Option<DMatrix<Complex64>>, // None: identity (no regularization)
}

impl PilotFilter {
    /// LMMSE filter W = R (R + beta / SNR I)^-1. Infinite SNR yields the
    /// identity.
    pub fn lmmse(r: &ChannelAutocorrelation, beta: BetaConstant, snr: Snr) -> Result<Self> {
        let np = r.matrix.nrows();
        if r.matrix.ncols() != np {
            return Err(Error::Input("autocorrelation matrix must be square".into()));
        }
        let linear = match snr.linear() {
            None => return Ok(PilotFilter { w: None }),
            Some(s) => s,
        };
        let c = beta.value / linear;
        let mut a = r.matrix.clone();
        for i in 0..np {
            a[(i, i)] += Complex64::new(c, 0.0);
        }
        Ok(PilotFilter {
            w: Some(right_divide(&r.matrix, &a)?),
        })
    }

    /// MMSE filter W = R (R + sigma^2 (X_p X_p^H)^-1)^-1 with X_p the
    /// diagonal matrix of transmitted pilots. Zero noise yields the identity.
    pub fn mmse(
        r: &ChannelAutocorrelation,
        tx_pilots: &[Complex64],
        noise_var: f64,
    ) -> Result<Self> {
        let np = r.matrix.nrows();
        if r.matrix.ncols() != np || tx_pilots.len() != np {
            return Err(Error::Input(format!(
                "dimension mismatch: R is {np}x{}, {} pilots",
                r.matrix.ncols(),
                tx_pilots.len()
            )));
        }
        if tx_pilots.iter().any(|x| x.norm_sqr() == 0.0) {
            return Err(Error::Input("zero transmitted pilot symbol".into()));
        }
        if noise_var == 0.0 {
            return Ok(PilotFilter { w: None });
        }
        let mut a = r.matrix.clone();
        for (i, x) in tx_pilots.iter().enumerate() {
            // (X_p X_p^H)^-1 is diagonal with entries 1 / |x_p|^2.
            a[(i, i)] += Complex64::new(noise_var / x.norm_sqr(), 0.0);
        }
        Ok(PilotFilter {
            w: Some(right_divide(&r.matrix, &a)?),
        })
    }

    pub fn apply(&self, est: &PilotEstimate) -> PilotEstimate {
        match &self.w {
            None => est.clone(),
            Some(w) => {
                let v = DVector::from_column_slice(&est.values);
                let filtered = w * v;
                PilotEstimate {
                    values: filtered.iter().copied().collect(),
                    positions: est.positions.clone(),
                }
            }
        }
    }
}

/// One-shot LMMSE at the pilots; see [`PilotFilter::lmmse`] to reuse the
/// filter across frames.
pub fn lmmse_estimate(
    est: &PilotEstimate,
    r: &ChannelAutocorrelation,
    beta: BetaConstant,
    snr: Snr,
) -> Result<PilotEstimate> {
    if r.matrix.nrows() != est.values.len() {
        return Err(Error::Input(format!(
            "autocorrelation dimension {} does not match {} pilots",
            r.matrix.nrows(),
            est.values.len()
        )));
    }
    Ok(PilotFilter::lmmse(r, beta, snr)?.apply(est))
}

/// One-shot MMSE at the pilots.
pub fn mmse_estimate(
    est: &PilotEstimate,
    r: &ChannelAutocorrelation,
    tx_pilots: &[Complex64],
    noise_var: f64,
) -> Result<PilotEstimate> {
    if r.matrix.nrows() != est.values.len() {
        return Err(Error::Input(format!(
            "autocorrelation dimension {} does not match {} pilots",
            r.matrix.nrows(),
            est.values.len()
        )));
    }
    Ok(PilotFilter::mmse(r, tx_pilots, noise_var)?.apply(est))
}

fn frame_pilot_estimate(frame: &OfdmFrame, col: usize) -> Result<PilotEstimate> {
    let rx: Vec<Complex64> = frame
        .pattern
        .positions
        .iter()
        .map(|&k| frame.rx[(k, col)])
        .collect();
    ls_pilot_estimate(&rx, &frame.pattern.pilot_symbols, &frame.pattern.positions)
}

/// LS + interpolation over every symbol column: the coarse N x M estimate.
pub fn estimate_ls_full(frame: &OfdmFrame) -> Result<ChannelMatrix> {
    estimate_ls_full_with(frame, InterpolationKind::Spline)
}

pub fn estimate_ls_full_with(
    frame: &OfdmFrame,
    kind: InterpolationKind,
) -> Result<ChannelMatrix> {
    let n = frame.num_subcarriers();
    frame.pattern.validate(n)?;
    let mut data = DMatrix::zeros(n, frame.num_symbols());
    for col in 0..frame.num_symbols() {
        let est = frame_pilot_estimate(frame, col)?;
        let full = interpolate_full_with(&est, n, kind)?;
        for (k, v) in full.into_iter().enumerate() {
            data[(k, col)] = v;
        }
    }
    Ok(ChannelMatrix::new(data))
}

/// LMMSE at the pilots followed by the same interpolation, per column.
pub fn estimate_lmmse_full(
    frame: &OfdmFrame,
    r: &ChannelAutocorrelation,
    beta: BetaConstant,
) -> Result<ChannelMatrix> {
    let filter = PilotFilter::lmmse(r, beta, frame.snr)?;
    estimate_filtered_full(frame, &filter)
}

/// MMSE at the pilots followed by the same interpolation, per column.
/// The noise variance is taken from the frame's SNR.
pub fn estimate_mmse_full(frame: &OfdmFrame, r: &ChannelAutocorrelation) -> Result<ChannelMatrix> {
    let filter = PilotFilter::mmse(
        r,
        &frame.pattern.pilot_symbols,
        frame.snr.noise_variance(),
    )?;
    estimate_filtered_full(frame, &filter)
}

/// Shared pilot-filtered estimation path given a prebuilt filter.
pub fn estimate_filtered_full(frame: &OfdmFrame, filter: &PilotFilter) -> Result<ChannelMatrix> {
    let n = frame.num_subcarriers();
    frame.pattern.validate(n)?;
    let mut data = DMatrix::zeros(n, frame.num_symbols());
    for col in 0..frame.num_symbols() {
        let est = frame_pilot_estimate(frame, col)?;
        let filtered = filter.apply(&est);
        let full = interpolate_full(&filtered, n)?;
        for (k, v) in full.into_iter().enumerate() {
            data[(k, col)] = v;
        }
    }
    Ok(ChannelMatrix::new(data))
}
