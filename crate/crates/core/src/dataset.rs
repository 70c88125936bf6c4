//! Dataset processing: complex matrices split into real/imaginary planes,
//! z-score normalization, sample generation from the simulator, and a
//! little-endian binary on-disk format with a JSON sidecar.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_ls_full_with, InterpolationKind};
use crate::ofdm::{
    generate_channel, modulate_frame, random_bits, transmit, ChannelMatrix, ChannelParams,
    Constellation, ModulationKind, PilotPattern, Snr,
};
use crate::seeds;

/// Real N x M matrix stored row-major (row = subcarrier, column = symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Real and imaginary planes of one complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanePair {
    pub real: Plane,
    pub imag: Plane,
}

/// Exact split into real/imaginary planes.
pub fn complex_to_planes(h: &ChannelMatrix) -> PlanePair {
    let (rows, cols) = h.data.shape();
    let mut real = vec![0.0; rows * cols];
    let mut imag = vec![0.0; rows * cols];
    for k in 0..rows {
        for m in 0..cols {
            real[k * cols + m] = h.data[(k, m)].re;
            imag[k * cols + m] = h.data[(k, m)].im;
        }
    }
    PlanePair {
        real: Plane { rows, cols, data: real },
        imag: Plane { rows, cols, data: imag },
    }
}

/// Exact merge, inverse of [`complex_to_planes`].
pub fn planes_to_complex(p: &PlanePair) -> Result<ChannelMatrix> {
    if p.real.rows != p.imag.rows || p.real.cols != p.imag.cols {
        return Err(Error::Input("plane dimensions differ".into()));
    }
    let (rows, cols) = (p.real.rows, p.real.cols);
    let data = DMatrix::from_fn(rows, cols, |k, m| {
        Complex64::new(p.real.data[k * cols + m], p.imag.data[k * cols + m])
    });
    Ok(ChannelMatrix::new(data))
}

/// Pooled z-score statistics over all training input-plane entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: f64,
    pub std: f64,
}

impl NormalizationStats {
    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    #[inline]
    pub fn invert(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

/// Dataset split with a dedicated seed stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn salt(self) -> u64 {
        match self {
            Split::Train => seeds::salt::SPLIT_TRAIN,
            Split::Val => seeds::salt::SPLIT_VAL,
            Split::Test => seeds::salt::SPLIT_TEST,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// One (coarse LS input, ground-truth target) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: PlanePair,
    pub target: PlanePair,
}

/// Condition metadata frozen into the dataset header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCondition {
    pub snr: Snr,
    pub pilots: usize,
    pub modulation: ModulationKind,
    pub split: Split,
    pub channel_seed: u64,
    pub noise_seed: u64,
}

/// In-memory dataset; [`write_dataset`]/[`read_dataset`] move it to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub num_subcarriers: usize,
    pub num_symbols: usize,
    pub condition: DatasetCondition,
    pub samples: Vec<Sample>,
}

/// Generate `count` samples: draw a channel, modulate random bits, transmit
/// at the configured SNR, run LS estimation, and keep (planes of the LS
/// estimate, planes of the true channel). Per-sample seeds come from
/// disjoint split streams; bit seeds derive from the channel stream.
#[allow(clippy::too_many_arguments)]
pub fn generate_dataset(
    params: &ChannelParams,
    pattern: &PilotPattern,
    constellation: &Constellation,
    snr: Snr,
    split: Split,
    count: usize,
    channel_seed: u64,
    noise_seed: u64,
    interpolation: InterpolationKind,
) -> Result<Dataset> {
    params.validate()?;
    let n = params.num_subcarriers;
    let m = params.symbols_per_frame;
    pattern.validate(n)?;
    let data_bits = pattern.data_positions(n).len() * m * constellation.bits_per_symbol;

    let mut samples = Vec::with_capacity(count);
    for idx in 0..count {
        let ch_seed = seeds::stream(channel_seed, split.salt(), idx as u64);
        let nz_seed = seeds::stream(noise_seed, split.salt(), idx as u64);
        let bit_seed = seeds::mix(ch_seed, seeds::salt::BITS);

        let channel = generate_channel(params, ch_seed)?;
        let bits = random_bits(data_bits, bit_seed);
        let tx = modulate_frame(&bits, constellation, pattern, n, m)?;
        let frame = transmit(&tx, &channel, pattern, snr, nz_seed)?;
        let coarse = estimate_ls_full_with(&frame, interpolation)?;

        let target = complex_to_planes(&channel);
        debug_assert_eq!(
            planes_to_complex(&target).expect("planes round trip").data,
            channel.data,
            "target planes must reconstruct the transmitted channel"
        );
        samples.push(Sample {
            input: complex_to_planes(&coarse),
            target,
        });
    }
    Ok(Dataset {
        num_subcarriers: n,
        num_symbols: m,
        condition: DatasetCondition {
            snr,
            pilots: pattern.num_pilots(),
            modulation: constellation.kind,
            split,
            channel_seed,
            noise_seed,
        },
        samples,
    })
}

/// Pooled mean/std over the input planes of a training set.
pub fn fit_normalization(train: &Dataset) -> Result<NormalizationStats> {
    if train.samples.is_empty() {
        return Err(Error::Config("cannot normalize an empty dataset".into()));
    }
    let mut count = 0usize;
    let mut sum = 0.0;
    for s in &train.samples {
        for plane in [&s.input.real, &s.input.imag] {
            sum += plane.data.iter().sum::<f64>();
            count += plane.data.len();
        }
    }
    let mean = sum / count as f64;
    let mut var = 0.0;
    for s in &train.samples {
        for plane in [&s.input.real, &s.input.imag] {
            var += plane.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
    }
    let std = (var / count as f64).sqrt();
    if std == 0.0 {
        return Err(Error::Config("zero variance in training inputs".into()));
    }
    Ok(NormalizationStats { mean, std })
}

const MAGIC: &[u8; 8] = b"SRCEDSET";
const FORMAT_VERSION: u32 = 1;

fn modulation_code(m: ModulationKind) -> u32 {
    match m {
        ModulationKind::Qpsk => 0,
        ModulationKind::Qam16 => 1,
    }
}

fn modulation_from_code(c: u32, path: &Path) -> Result<ModulationKind> {
    match c {
        0 => Ok(ModulationKind::Qpsk),
        1 => Ok(ModulationKind::Qam16),
        other => Err(Error::format(path, format!("unknown modulation code {other}"))),
    }
}

fn split_code(s: Split) -> u32 {
    match s {
        Split::Train => 0,
        Split::Val => 1,
        Split::Test => 2,
    }
}

fn split_from_code(c: u32, path: &Path) -> Result<Split> {
    match c {
        0 => Ok(Split::Train),
        1 => Ok(Split::Val),
        2 => Ok(Split::Test),
        other => Err(Error::format(path, format!("unknown split code {other}"))),
    }
}

/// Header duplicated into the human-readable sidecar.
#[derive(Debug, Serialize, Deserialize)]
struct SidecarHeader {
    version: u32,
    num_subcarriers: usize,
    num_symbols: usize,
    sample_count: usize,
    snr_db: Option<f64>,
    pilots: usize,
    modulation: ModulationKind,
    split: Split,
    channel_seed: u64,
    noise_seed: u64,
}

/// Write the binary dataset plus a `<path>.json` sidecar.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(ds.num_subcarriers as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(ds.num_symbols as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(ds.samples.len() as u64).to_le_bytes()).map_err(io_err)?;
    let snr_bits = match ds.condition.snr {
        Snr::Db(db) => db,
        Snr::Infinite => f64::INFINITY,
    };
    w.write_all(&snr_bits.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(ds.condition.pilots as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&modulation_code(ds.condition.modulation).to_le_bytes()).map_err(io_err)?;
    w.write_all(&split_code(ds.condition.split).to_le_bytes()).map_err(io_err)?;
    w.write_all(&ds.condition.channel_seed.to_le_bytes()).map_err(io_err)?;
    w.write_all(&ds.condition.noise_seed.to_le_bytes()).map_err(io_err)?;

    for s in &ds.samples {
        for plane in [&s.input.real, &s.input.imag, &s.target.real, &s.target.imag] {
            for v in &plane.data {
                w.write_all(&v.to_le_bytes()).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)?;

    let sidecar = SidecarHeader {
        version: FORMAT_VERSION,
        num_subcarriers: ds.num_subcarriers,
        num_symbols: ds.num_symbols,
        sample_count: ds.samples.len(),
        snr_db: ds.condition.snr.db_value(),
        pilots: ds.condition.pilots,
        modulation: ds.condition.modulation,
        split: ds.condition.split,
        channel_seed: ds.condition.channel_seed,
        noise_seed: ds.condition.noise_seed,
    };
    let sidecar_path = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::format(&sidecar_path, e.to_string()))?;
    std::fs::write(&sidecar_path, json).map_err(|e| Error::io(&sidecar_path, e))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Read a dataset written by [`write_dataset`]; bit-exact round trip.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(Error::format(path, "bad magic"));
    }
    let version = read_u32(&mut r, path)?;
    if version != FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r, path)? as usize;
    let m = read_u32(&mut r, path)? as usize;
    let count = read_u64(&mut r, path)? as usize;
    let snr_raw = read_f64(&mut r, path)?;
    let snr = if snr_raw.is_infinite() { Snr::Infinite } else { Snr::Db(snr_raw) };
    let pilots = read_u32(&mut r, path)? as usize;
    let modulation = modulation_from_code(read_u32(&mut r, path)?, path)?;
    let split = split_from_code(read_u32(&mut r, path)?, path)?;
    let channel_seed = read_u64(&mut r, path)?;
    let noise_seed = read_u64(&mut r, path)?;

    let plane_len = n * m;
    let mut samples = Vec::with_capacity(count);
    let read_plane = |r: &mut BufReader<File>| -> Result<Plane> {
        let mut buf = vec![0u8; plane_len * 8];
        read_exact(r, &mut buf, path)?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Plane { rows: n, cols: m, data })
    };
    for _ in 0..count {
        let input = PlanePair {
            real: read_plane(&mut r)?,
            imag: read_plane(&mut r)?,
        };
        let target = PlanePair {
            real: read_plane(&mut r)?,
            imag: read_plane(&mut r)?,
        };
        samples.push(Sample { input, target });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::format(path, "trailing bytes after payload"));
    }
    Ok(Dataset {
        num_subcarriers: n,
        num_symbols: m,
        condition: DatasetCondition {
            snr,
            pilots,
            modulation,
            split,
            channel_seed,
            noise_seed,
        },
        samples,
    })
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::io(path, e))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_params() -> ChannelParams {
        ChannelParams {
            num_subcarriers: 16,
            symbols_per_frame: 4,
            num_taps: 4,
            ..ChannelParams::default()
        }
    }

    fn small_dataset(count: usize, snr: Snr) -> Dataset {
        let params = small_params();
        let pattern = PilotPattern::comb(16, 8).unwrap();
        generate_dataset(
            &params,
            &pattern,
            &Constellation::qpsk(),
            snr,
            Split::Train,
            count,
            11,
            22,
            InterpolationKind::Spline,
        )
        .unwrap()
    }

    #[test]
    fn plane_split_merge_roundtrip() {
        let h = generate_channel(&small_params(), 5).unwrap();
        let planes = complex_to_planes(&h);
        let back = planes_to_complex(&planes).unwrap();
        assert_eq!(back.data, h.data);

        // Real-valued matrix: imaginary plane all zeros.
        let real_h = ChannelMatrix::new(DMatrix::from_fn(4, 3, |k, m| {
            Complex64::new((k + m) as f64, 0.0)
        }));
        let p = complex_to_planes(&real_h);
        assert!(p.imag.data.iter().all(|&v| v == 0.0));

        // Purely imaginary matrix: real plane zero, imag carries the values.
        let imag_h = ChannelMatrix::new(DMatrix::from_fn(4, 3, |k, m| {
            Complex64::new(0.0, (k * 3 + m) as f64)
        }));
        let p = complex_to_planes(&imag_h);
        assert!(p.real.data.iter().all(|&v| v == 0.0));
        assert_eq!(p.imag.data[5], 5.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = small_dataset(3, Snr::Db(10.0));
        let b = small_dataset(3, Snr::Db(10.0));
        assert_eq!(a, b);
    }

    #[test]
    fn empty_dataset_roundtrips() {
        let ds = small_dataset(0, Snr::Db(10.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.ds");
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back, ds);
        assert!(sidecar_path(&path).exists());
    }

    #[test]
    fn file_roundtrip_bit_exact_and_byte_identical() {
        let ds = small_dataset(5, Snr::Db(20.0));
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ds");
        let p2 = dir.path().join("b.ds");
        write_dataset(&ds, &p1).unwrap();
        let back = read_dataset(&p1).unwrap();
        assert_eq!(back, ds);
        write_dataset(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn infinite_snr_survives_roundtrip() {
        let ds = small_dataset(1, Snr::Infinite);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inf.ds");
        write_dataset(&ds, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap().condition.snr, Snr::Infinite);
    }

    #[test]
    fn normalization_pools_to_zero_mean_unit_std() {
        let ds = small_dataset(20, Snr::Db(15.0));
        let norm = fit_normalization(&ds).unwrap();
        let mut vals = Vec::new();
        for s in &ds.samples {
            for p in [&s.input.real, &s.input.imag] {
                vals.extend(p.data.iter().map(|&v| norm.apply(v)));
            }
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 1e-10, "pooled mean {mean}");
        assert_relative_eq!(var.sqrt(), 1.0, epsilon = 1e-10);

        for v in [-3.0, 0.0, 0.1234, 42.0] {
            assert_relative_eq!(norm.invert(norm.apply(v)), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_dataset_rejected() {
        let mut ds = small_dataset(2, Snr::Db(10.0));
        for s in &mut ds.samples {
            s.input.real.data.iter_mut().for_each(|v| *v = 0.5);
            s.input.imag.data.iter_mut().for_each(|v| *v = 0.5);
        }
        assert!(matches!(fit_normalization(&ds), Err(Error::Config(_))));
        assert!(fit_normalization(&Dataset { samples: vec![], ..ds }).is_err());
    }

    #[test]
    fn high_snr_inputs_closer_to_target() {
        let low = small_dataset(60, Snr::Db(0.0));
        let high = small_dataset(60, Snr::Db(20.0));
        let mse = |ds: &Dataset| {
            ds.samples
                .iter()
                .map(|s| {
                    let a = planes_to_complex(&s.input).unwrap();
                    let b = planes_to_complex(&s.target).unwrap();
                    a.mse(&b)
                })
                .sum::<f64>()
                / ds.samples.len() as f64
        };
        let (lo, hi) = (mse(&low), mse(&high));
        assert!(hi > 0.0, "input/target MSE must be positive, got {hi}");
        assert!(hi < lo, "20 dB MSE {hi} not below 0 dB MSE {lo}");
    }
}
