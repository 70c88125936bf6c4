//! Rayleigh multipath link simulation.
//!
//! Time-varying channels come from a sum-of-sinusoids Jakes generator: each
//! delay tap evolves as an independent Rayleigh process with the configured
//! Doppler, weighted by an exponential power-delay profile and transformed to
//! a per-subcarrier frequency response. Frames are comb-pilot OFDM grids sent
//! through the channel with additive white Gaussian noise.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Propagation speed used for Doppler, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Physical and dimensional parameters of the simulated link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
    /// Mobile velocity, m/s.
    pub mobile_velocity: f64,
    /// Number of delay taps; tap delays are 0..num_taps-1 sampling periods.
    /// The cyclic prefix length equals this, so the per-subcarrier
    /// multiplicative channel model is exact.
    pub num_taps: usize,
    /// Subcarriers per OFDM symbol (N).
    pub num_subcarriers: usize,
    /// OFDM symbols per frame (M).
    pub symbols_per_frame: usize,
    /// Exponential power-delay-profile decay rate per tap.
    pub pdp_decay: f64,
    /// Sum-of-sinusoids order per tap.
    pub num_sinusoids: usize,
    /// Baseband sample rate, Hz. Sets the OFDM symbol duration
    /// (N + CP) / sample_rate and with it the Doppler per symbol.
    pub sample_rate: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        // 2.6 GHz carrier, 15 m/s, 16 taps spanning 16 sampling periods,
        // 64 x 20 grid; PDP decays 20 dB over the tap span.
        ChannelParams {
            carrier_freq: 2.6e9,
            mobile_velocity: 15.0,
            num_taps: 16,
            num_subcarriers: 64,
            symbols_per_frame: 20,
            pdp_decay: (100.0f64).ln() / 15.0,
            num_sinusoids: 16,
            sample_rate: 1.0e6,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_subcarriers == 0 {
            return Err(Error::Config("num_subcarriers must be positive".into()));
        }
        if self.symbols_per_frame == 0 {
            return Err(Error::Config("symbols_per_frame must be positive".into()));
        }
        if self.num_taps == 0 {
            return Err(Error::Config("num_taps must be positive".into()));
        }
        if self.num_taps > self.num_subcarriers {
            return Err(Error::Config(format!(
                "num_taps {} exceeds num_subcarriers {}",
                self.num_taps, self.num_subcarriers
            )));
        }
        if self.mobile_velocity < 0.0 {
            return Err(Error::Config("mobile_velocity must be non-negative".into()));
        }
        if self.carrier_freq <= 0.0 || self.sample_rate <= 0.0 {
            return Err(Error::Config(
                "carrier_freq and sample_rate must be positive".into(),
            ));
        }
        if self.num_sinusoids == 0 {
            return Err(Error::Config("num_sinusoids must be positive".into()));
        }
        if self.pdp_decay < 0.0 {
            return Err(Error::Config("pdp_decay must be non-negative".into()));
        }
        Ok(())
    }

    /// Maximum Doppler shift f_d = v * f_c / c, Hz.
    pub fn max_doppler(&self) -> f64 {
        self.mobile_velocity * self.carrier_freq / SPEED_OF_LIGHT
    }

    /// Cyclic prefix length in samples, equal to the tap span.
    pub fn cyclic_prefix(&self) -> usize {
        self.num_taps
    }

    /// OFDM symbol duration (N + CP) / sample_rate, seconds.
    pub fn symbol_duration(&self) -> f64 {
        (self.num_subcarriers + self.cyclic_prefix()) as f64 / self.sample_rate
    }

    /// Normalized power-delay profile; positive weights summing to 1.
    pub fn pdp_weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.num_taps)
            .map(|l| (-self.pdp_decay * l as f64).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Complex N x M time-frequency channel response H(k, m).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// N rows (subcarriers) by M columns (OFDM symbols).
    pub data: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Self {
        ChannelMatrix { data }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_symbols(&self) -> usize {
        self.data.ncols()
    }

    /// Mean of |H(k,m)|^2 over the grid.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|h| h.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    /// Mean squared error against another matrix, ||A - B||^2 / (N * M).
    pub fn mse(&self, other: &ChannelMatrix) -> f64 {
        assert_eq!(self.data.shape(), other.data.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / self.data.len() as f64
    }
}

/// Signal-to-noise ratio, either finite decibels or the noiseless sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Snr {
    Db(f64),
    Infinite,
}

impl Snr {
    /// Linear SNR, or None for the noiseless sentinel.
    pub fn linear(self) -> Option<f64> {
        match self {
            Snr::Db(db) => Some(10f64.powf(db / 10.0)),
            Snr::Infinite => None,
        }
    }

    /// Noise variance for unit transmit power (1 / linear SNR), 0 when noiseless.
    pub fn noise_variance(self) -> f64 {
        self.linear().map_or(0.0, |s| 1.0 / s)
    }

    pub fn db_value(self) -> Option<f64> {
        match self {
            Snr::Db(db) => Some(db),
            Snr::Infinite => None,
        }
    }
}

impl std::fmt::Display for Snr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Snr::Db(db) => write!(f, "{db}"),
            Snr::Infinite => write!(f, "inf"),
        }
    }
}

/// Comb-type pilot layout with the known transmitted pilot symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPattern {
    /// Strictly increasing pilot subcarrier indices.
    pub positions: Vec<usize>,
    /// Unit-magnitude pilot symbols, one per position.
    pub pilot_symbols: Vec<Complex64>,
}

impl PilotPattern {
    /// Equally spaced comb: `num_pilots` positions at stride N / num_pilots
    /// starting at subcarrier 0, all carrying (1 + i) / sqrt(2).
    pub fn comb(num_subcarriers: usize, num_pilots: usize) -> Result<Self> {
        if num_pilots < 2 || num_pilots > num_subcarriers {
            return Err(Error::Config(format!(
                "pilot count {num_pilots} out of range for {num_subcarriers} subcarriers"
            )));
        }
        if num_subcarriers % num_pilots != 0 {
            return Err(Error::Config(format!(
                "pilot count {num_pilots} must divide {num_subcarriers}"
            )));
        }
        let stride = num_subcarriers / num_pilots;
        let sym = Complex64::new(1.0, 1.0) / 2f64.sqrt();
        Ok(PilotPattern {
            positions: (0..num_pilots).map(|i| i * stride).collect(),
            pilot_symbols: vec![sym; num_pilots],
        })
    }

    pub fn num_pilots(&self) -> usize {
        self.positions.len()
    }

    /// Data subcarrier indices (complement of the pilot positions).
    pub fn data_positions(&self, num_subcarriers: usize) -> Vec<usize> {
        let mut is_pilot = vec![false; num_subcarriers];
        for &p in &self.positions {
            is_pilot[p] = true;
        }
        (0..num_subcarriers).filter(|&k| !is_pilot[k]).collect()
    }

    pub fn validate(&self, num_subcarriers: usize) -> Result<()> {
        if self.positions.len() != self.pilot_symbols.len() {
            return Err(Error::Config("pilot positions/symbols length mismatch".into()));
        }
        for w in self.positions.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("pilot positions must be strictly increasing".into()));
            }
        }
        if self.positions.iter().any(|&p| p >= num_subcarriers) {
            return Err(Error::Config("pilot position out of range".into()));
        }
        for s in &self.pilot_symbols {
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Config("pilot symbols must have unit magnitude".into()));
            }
        }
        Ok(())
    }
}

/// Supported modulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    Qpsk,
    Qam16,
}

impl std::fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModulationKind::Qpsk => write!(f, "qpsk"),
            ModulationKind::Qam16 => write!(f, "16qam"),
        }
    }
}

/// Gray-coded constellation with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub kind: ModulationKind,
    /// Point for each bit-tuple index (bits packed MSB-first).
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(kind: ModulationKind) -> Self {
        match kind {
            ModulationKind::Qpsk => Self::qpsk(),
            ModulationKind::Qam16 => Self::qam16(),
        }
    }

    /// QPSK, quadrant Gray code: bit 0 selects the real sign, bit 1 the
    /// imaginary sign; (0,0) maps to (1 + i) / sqrt(2).
    pub fn qpsk() -> Self {
        let a = 1.0 / 2f64.sqrt();
        let sign = |b: usize| if b == 0 { a } else { -a };
        let points = (0..4)
            .map(|idx| Complex64::new(sign(idx >> 1), sign(idx & 1)))
            .collect();
        Constellation {
            kind: ModulationKind::Qpsk,
            points,
            bits_per_symbol: 2,
        }
    }

    /// 16QAM, per-axis Gray code (00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3),
    /// scaled by 1 / sqrt(10) for unit average energy. Bits (b0 b1) set the
    /// real axis, (b2 b3) the imaginary axis.
    pub fn qam16() -> Self {
        const LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0]; // indexed by 2-bit value 00,01,10,11
        let scale = 1.0 / 10f64.sqrt();
        let points = (0..16)
            .map(|idx| {
                let re = LEVELS[(idx >> 2) & 0b11] * scale;
                let im = LEVELS[idx & 0b11] * scale;
                Complex64::new(re, im)
            })
            .collect();
        Constellation {
            kind: ModulationKind::Qam16,
            points,
            bits_per_symbol: 4,
        }
    }

    /// Map a bit tuple (MSB first) to its constellation point.
    pub fn map_bits(&self, bits: &[bool]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.points[idx]
    }

    /// Mean |point|^2 over the constellation.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

/// One transmitted/received OFDM frame with its pilot metadata.
#[derive(Debug, Clone)]
pub struct OfdmFrame {
    /// Transmitted grid X(k, m), N x M.
    pub tx: DMatrix<Complex64>,
    /// Received grid Y(k, m), N x M.
    pub rx: DMatrix<Complex64>,
    pub pattern: PilotPattern,
    pub snr: Snr,
}

impl OfdmFrame {
    pub fn num_subcarriers(&self) -> usize {
        self.tx.nrows()
    }

    pub fn num_symbols(&self) -> usize {
        self.tx.ncols()
    }
}

/// Generate a time-varying Rayleigh channel (improved Jakes model).
///
/// Each tap is an independent sum-of-sinusoids process
///   g(t) = sqrt(w_l / U) * sum_u [cos(w_d t cos(a_u) + phi_u)
///                                 + i cos(w_d t sin(a_u) + psi_u)]
/// with arrival angles a_u = (2 pi u - pi + theta) / (4 U) and theta, phi,
/// psi drawn uniformly per tap. The frequency response is the tap DFT per
/// OFDM symbol. Deterministic for a given (params, seed).
pub fn generate_channel(params: &ChannelParams, seed: u64) -> Result<ChannelMatrix> {
    params.validate()?;
    let n = params.num_subcarriers;
    let m = params.symbols_per_frame;
    let taps = TapProcesses::draw(params, seed);

    // Per-symbol tap gains, then DFT across delay per subcarrier.
    let t_sym = params.symbol_duration();
    let mut data = DMatrix::zeros(n, m);
    let twiddle = tap_dft_matrix(n, params.num_taps);
    let mut gains = vec![Complex64::new(0.0, 0.0); params.num_taps];
    for col in 0..m {
        let t = col as f64 * t_sym;
        for (l, g) in gains.iter_mut().enumerate() {
            *g = taps.gain(l, t);
        }
        for k in 0..n {
            let mut h = Complex64::new(0.0, 0.0);
            for l in 0..params.num_taps {
                h += gains[l] * twiddle[(k, l)];
            }
            data[(k, col)] = h;
        }
    }
    Ok(ChannelMatrix::new(data))
}

/// DFT factors e^(-2 pi i k l / N) for tap delay l at subcarrier k.
fn tap_dft_matrix(n: usize, num_taps: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, num_taps, |k, l| {
        let angle = -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64;
        Complex64::new(angle.cos(), angle.sin())
    })
}

/// Frozen random draws for every tap of one channel realization.
struct TapProcesses {
    omega_d: f64,
    /// Per tap: scale sqrt(w_l / U) and per-sinusoid (cos a, sin a, phi, psi).
    taps: Vec<(f64, Vec<[f64; 4]>)>,
}

impl TapProcesses {
    fn draw(params: &ChannelParams, seed: u64) -> Self {
        let mut rng = seeds::rng(seed);
        let u = params.num_sinusoids;
        let two_pi = 2.0 * std::f64::consts::PI;
        let taps = params
            .pdp_weights()
            .iter()
            .map(|&w| {
                let theta: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let sinusoids = (1..=u)
                    .map(|k| {
                        let alpha = (two_pi * k as f64 - std::f64::consts::PI + theta)
                            / (4.0 * u as f64);
                        let phi: f64 =
                            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                        let psi: f64 =
                            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                        [alpha.cos(), alpha.sin(), phi, psi]
                    })
                    .collect();
                ((w / u as f64).sqrt(), sinusoids)
            })
            .collect();
        TapProcesses {
            omega_d: two_pi * params.max_doppler(),
            taps,
        }
    }

    fn gain(&self, tap: usize, t: f64) -> Complex64 {
        let (scale, sinusoids) = &self.taps[tap];
        let mut re = 0.0;
        let mut im = 0.0;
        for s in sinusoids {
            re += (self.omega_d * t * s[0] + s[2]).cos();
            im += (self.omega_d * t * s[1] + s[3]).cos();
        }
        Complex64::new(re * scale, im * scale)
    }
}

/// Empirical normalized autocorrelation of one unit-power tap across
/// `max_lag` symbol-time lags, averaged over independent realizations.
pub fn tap_autocorrelation(
    params: &ChannelParams,
    num_realizations: usize,
    max_lag: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if num_realizations < 1000 {
        return Err(Error::Config(format!(
            "need at least 1000 realizations, got {num_realizations}"
        )));
    }
    let single_tap = ChannelParams {
        num_taps: 1,
        pdp_decay: 0.0,
        ..params.clone()
    };
    let t_sym = params.symbol_duration();
    let mut corr = vec![Complex64::new(0.0, 0.0); max_lag + 1];
    for r in 0..num_realizations {
        let taps = TapProcesses::draw(&single_tap, seeds::stream(seed, seeds::salt::AUTOCORR, r as u64));
        let g0 = taps.gain(0, 0.0);
        for (lag, c) in corr.iter_mut().enumerate() {
            *c += taps.gain(0, lag as f64 * t_sym) * g0.conj();
        }
    }
    let power = corr[0].re;
    Ok(corr.iter().map(|c| c.re / power).collect())
}

/// Fill an N x M grid: Gray-mapped data symbols on data subcarriers, the
/// pattern's pilot symbols on pilot subcarriers of every column.
pub fn modulate_frame(
    bits: &[bool],
    constellation: &Constellation,
    pattern: &PilotPattern,
    num_subcarriers: usize,
    num_symbols: usize,
) -> Result<DMatrix<Complex64>> {
    pattern.validate(num_subcarriers)?;
    let data_pos = pattern.data_positions(num_subcarriers);
    let needed = data_pos.len() * num_symbols * constellation.bits_per_symbol;
    if bits.len() < needed {
        return Err(Error::Input(format!(
            "need {needed} bits for {} data subcarriers x {num_symbols} symbols, got {}",
            data_pos.len(),
            bits.len()
        )));
    }
    let mut grid = DMatrix::zeros(num_subcarriers, num_symbols);
    let mut offset = 0;
    for col in 0..num_symbols {
        for (&k, &sym) in pattern.positions.iter().zip(&pattern.pilot_symbols) {
            grid[(k, col)] = sym;
        }
        for &k in &data_pos {
            grid[(k, col)] =
                constellation.map_bits(&bits[offset..offset + constellation.bits_per_symbol]);
            offset += constellation.bits_per_symbol;
        }
    }
    Ok(grid)
}

/// Apply the channel and AWGN: rx = H .* tx + w with w circularly symmetric
/// complex Gaussian of variance 1 / linear SNR. Deterministic per seed;
/// `Snr::Infinite` disables the noise entirely.
pub fn transmit(
    tx: &DMatrix<Complex64>,
    channel: &ChannelMatrix,
    pattern: &PilotPattern,
    snr: Snr,
    seed: u64,
) -> Result<OfdmFrame> {
    if tx.shape() != channel.data.shape() {
        return Err(Error::Input(format!(
            "tx grid {:?} does not match channel {:?}",
            tx.shape(),
            channel.data.shape()
        )));
    }
    let mut rx = tx.component_mul(&channel.data);
    if let Some(linear) = snr.linear() {
        let sigma = (1.0 / linear / 2.0).sqrt();
        let mut rng = seeds::rng(seed);
        let normal = rand_distr::Normal::new(0.0, sigma).expect("valid sigma");
        for y in rx.iter_mut() {
            *y += Complex64::new(rng.sample(normal), rng.sample(normal));
        }
    }
    Ok(OfdmFrame {
        tx: tx.clone(),
        rx,
        pattern: pattern.clone(),
        snr,
    })
}

/// Draw `count` random bits from the seeded stream.
pub fn random_bits(count: usize, seed: u64) -> Vec<bool> {
    let mut rng = seeds::rng(seed);
    (0..count).map(|_| rng.gen::<bool>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn doppler_matches_hand_computation() {
        // 15 m/s at 2.6 GHz: f_d = 15 * 2.6e9 / 3e8 = 130 Hz.
        let params = ChannelParams::default();
        assert_relative_eq!(params.max_doppler(), 130.0, max_relative = 1e-12);
    }

    #[test]
    fn pdp_unit_power_and_20db_span() {
        let params = ChannelParams::default();
        let w = params.pdp_weights();
        assert_eq!(w.len(), 16);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(w[15] / w[0], 0.01, max_relative = 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn zero_velocity_freezes_channel() {
        let params = ChannelParams {
            mobile_velocity: 0.0,
            ..ChannelParams::default()
        };
        let h = generate_channel(&params, 3).unwrap();
        let first = h.data.column(0).clone_owned();
        for m in 1..h.num_symbols() {
            assert_eq!(h.data.column(m), first, "column {m} differs");
        }
    }

    #[test]
    fn single_tap_is_flat_in_frequency() {
        let params = ChannelParams {
            num_taps: 1,
            ..ChannelParams::default()
        };
        let h = generate_channel(&params, 11).unwrap();
        for m in 0..h.num_symbols() {
            let first = h.data[(0, m)];
            for k in 1..h.num_subcarriers() {
                assert_relative_eq!(h.data[(k, m)].re, first.re, epsilon = 1e-12);
                assert_relative_eq!(h.data[(k, m)].im, first.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn channel_deterministic_per_seed() {
        let params = ChannelParams::default();
        let a = generate_channel(&params, 99).unwrap();
        let b = generate_channel(&params, 99).unwrap();
        assert_eq!(a.data, b.data);
        let c = generate_channel(&params, 100).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ChannelParams::default();
        p.num_subcarriers = 0;
        assert!(generate_channel(&p, 0).is_err());
        let mut p = ChannelParams::default();
        p.mobile_velocity = -1.0;
        assert!(generate_channel(&p, 0).is_err());
    }

    #[test]
    fn autocorrelation_lag_zero_and_frozen() {
        let params = ChannelParams::default();
        let ac = tap_autocorrelation(&params, 1000, 5, 7).unwrap();
        assert_relative_eq!(ac[0], 1.0, epsilon = 1e-12);

        let frozen = ChannelParams {
            mobile_velocity: 0.0,
            ..ChannelParams::default()
        };
        let ac = tap_autocorrelation(&frozen, 1000, 5, 7).unwrap();
        for rho in ac {
            assert_relative_eq!(rho, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn autocorrelation_requires_enough_realizations() {
        let params = ChannelParams::default();
        assert!(tap_autocorrelation(&params, 10, 5, 7).is_err());
    }

    #[test]
    fn qpsk_gray_mapping() {
        let c = Constellation::qpsk();
        let a = 1.0 / 2f64.sqrt();
        assert_relative_eq!(c.map_bits(&[false, false]).re, a);
        assert_relative_eq!(c.map_bits(&[false, false]).im, a);
        assert_relative_eq!(c.map_bits(&[true, true]).re, -a);
        assert_relative_eq!(c.map_bits(&[true, true]).im, -a);
        assert_relative_eq!(c.mean_energy(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qam16_unit_energy_by_enumeration() {
        // Oracle: direct sum over the 16 normalized lattice points.
        let c = Constellation::qam16();
        assert_eq!(c.points.len(), 16);
        let direct: f64 = c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert_relative_eq!(direct, 1.0, epsilon = 1e-12);
        // Gray property along each axis: adjacent levels differ in one bit.
        let axis = [(0b00, -3.0), (0b01, -1.0), (0b11, 1.0), (0b10, 3.0)];
        for w in axis.windows(2) {
            let (b0, _) = w[0];
            let (b1, _) = w[1];
            assert_eq!(((b0 ^ b1) as u32).count_ones(), 1);
        }
    }

    #[test]
    fn constellation_bit_map_bijective() {
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            let mut seen = std::collections::HashSet::new();
            for p in &c.points {
                assert!(seen.insert((p.re.to_bits(), p.im.to_bits())));
            }
            assert_eq!(seen.len(), 1 << c.bits_per_symbol);
        }
    }

    #[test]
    fn modulate_places_pilots_everywhere() {
        let pattern = PilotPattern::comb(16, 4).unwrap();
        let c = Constellation::qpsk();
        let bits = random_bits(12 * 3 * 2, 5);
        let grid = modulate_frame(&bits, &c, &pattern, 16, 3).unwrap();
        for col in 0..3 {
            for (&k, &s) in pattern.positions.iter().zip(&pattern.pilot_symbols) {
                assert_eq!(grid[(k, col)], s);
            }
        }
    }

    #[test]
    fn modulate_all_pilot_pattern_tiles_pilots() {
        let pattern = PilotPattern::comb(8, 8).unwrap();
        let c = Constellation::qpsk();
        let grid = modulate_frame(&[], &c, &pattern, 8, 4).unwrap();
        for col in 0..4 {
            for k in 0..8 {
                assert_eq!(grid[(k, col)], pattern.pilot_symbols[k]);
            }
        }
    }

    #[test]
    fn modulate_rejects_short_bit_stream() {
        let pattern = PilotPattern::comb(16, 4).unwrap();
        let c = Constellation::qpsk();
        let err = modulate_frame(&[true; 3], &c, &pattern, 16, 3);
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn noiseless_transmit_is_exact_product() {
        let params = ChannelParams::default();
        let pattern = PilotPattern::comb(64, 8).unwrap();
        let c = Constellation::qpsk();
        let h = generate_channel(&params, 1).unwrap();
        let bits = random_bits(56 * 20 * 2, 2);
        let tx = modulate_frame(&bits, &c, &pattern, 64, 20).unwrap();
        let frame = transmit(&tx, &h, &pattern, Snr::Infinite, 3).unwrap();
        for (y, (x, hh)) in frame.rx.iter().zip(tx.iter().zip(h.data.iter())) {
            assert_eq!(*y, x * hh);
        }
    }

    #[test]
    fn identity_channel_noiseless_roundtrip() {
        let pattern = PilotPattern::comb(8, 4).unwrap();
        let ones = ChannelMatrix::new(DMatrix::from_element(8, 2, Complex64::new(1.0, 0.0)));
        let c = Constellation::qpsk();
        let bits = random_bits(4 * 2 * 2, 9);
        let tx = modulate_frame(&bits, &c, &pattern, 8, 2).unwrap();
        let frame = transmit(&tx, &ones, &pattern, Snr::Infinite, 0).unwrap();
        assert_eq!(frame.rx, tx);
    }

    #[test]
    fn transmit_rejects_dimension_mismatch() {
        let pattern = PilotPattern::comb(8, 4).unwrap();
        let h = ChannelMatrix::new(DMatrix::from_element(8, 3, Complex64::new(1.0, 0.0)));
        let tx = DMatrix::from_element(8, 2, Complex64::new(1.0, 0.0));
        assert!(transmit(&tx, &h, &pattern, Snr::Infinite, 0).is_err());
    }

    #[test]
    fn zero_db_noise_power_near_unity() {
        // Monte-Carlo estimate of the injected noise variance at 0 dB.
        let pattern = PilotPattern::comb(64, 8).unwrap();
        let ones = ChannelMatrix::new(DMatrix::from_element(64, 20, Complex64::new(1.0, 0.0)));
        let c = Constellation::qpsk();
        let mut sum = 0.0;
        let mut count = 0usize;
        for trial in 0..100u64 {
            let bits = random_bits(56 * 20 * 2, seeds::stream(10, seeds::salt::BITS, trial));
            let tx = modulate_frame(&bits, &c, &pattern, 64, 20).unwrap();
            let frame = transmit(
                &tx,
                &ones,
                &pattern,
                Snr::Db(0.0),
                seeds::stream(10, seeds::salt::NOISE, trial),
            )
            .unwrap();
            sum += (&frame.rx - &tx).iter().map(|w| w.norm_sqr()).sum::<f64>();
            count += frame.rx.len();
        }
        let measured = sum / count as f64; // 128k samples
        assert!((measured - 1.0).abs() < 0.02, "noise power {measured}");
    }
}
