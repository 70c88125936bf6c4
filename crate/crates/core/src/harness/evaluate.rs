//! Test-set evaluation: per-estimator MSE against the ground-truth channel,
//! computed on the reconstructed complex matrices.

use num_complex::Complex64;

use crate::dataset::{planes_to_complex, Dataset, PlanePair};
use crate::error::{Error, Result};
use crate::estimators::{
    beta_constant, interpolate_full, ChannelAutocorrelation, PilotEstimate, PilotFilter,
};
use crate::harness::config::PlaneMode;
use crate::harness::report::MseRow;
use crate::harness::train::TrainedModel;
use crate::models::infer;
use crate::nn::Tensor4;
use crate::ofdm::{ChannelMatrix, Constellation, PilotPattern};

/// Which classical baselines to evaluate alongside the models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineSet {
    pub ls: bool,
    pub lmmse: bool,
    pub mmse: bool,
}

impl BaselineSet {
    pub fn all() -> Self {
        BaselineSet {
            ls: true,
            lmmse: true,
            mmse: true,
        }
    }

    pub fn none() -> Self {
        BaselineSet {
            ls: false,
            lmmse: false,
            mmse: false,
        }
    }
}

/// Refine one sample's input planes with a trained model and rebuild the
/// complex estimate.
pub fn refine_sample(model: &TrainedModel, input: &PlanePair) -> Result<ChannelMatrix> {
    let refined = match model.meta.io_channels {
        1 => PlanePair {
            real: infer(&model.model, &input.real, &model.norm)?,
            imag: infer(&model.model, &input.imag, &model.norm)?,
        },
        2 => {
            let (h, w) = (input.real.rows, input.real.cols);
            let mut x = Tensor4::zeros([1, 2, h, w]);
            for (d, &s) in x.plane_mut(0, 0).iter_mut().zip(&input.real.data) {
                *d = model.norm.apply(s);
            }
            for (d, &s) in x.plane_mut(0, 1).iter_mut().zip(&input.imag.data) {
                *d = model.norm.apply(s);
            }
            let y = model.model.forward(&x)?;
            let take = |c: usize| crate::dataset::Plane {
                rows: h,
                cols: w,
                data: y.plane(0, c).iter().map(|&v| model.norm.invert(v)).collect(),
            };
            PlanePair {
                real: take(0),
                imag: take(1),
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unsupported checkpoint channel count {other}"
            )))
        }
    };
    planes_to_complex(&refined)
}

/// Extract the pilot-position estimate from the stored LS input (the spline
/// passes through the pilots exactly, so these are the raw LS values).
fn pilot_estimate_from_input(
    input: &ChannelMatrix,
    pattern: &PilotPattern,
    col: usize,
) -> PilotEstimate {
    PilotEstimate {
        values: pattern
            .positions
            .iter()
            .map(|&k| input.data[(k, col)])
            .collect(),
        positions: pattern.positions.clone(),
    }
}

fn refilter_full(
    input: &ChannelMatrix,
    pattern: &PilotPattern,
    filter: &PilotFilter,
) -> Result<ChannelMatrix> {
    let n = input.num_subcarriers();
    let mut data = nalgebra::DMatrix::<Complex64>::zeros(n, input.num_symbols());
    for col in 0..input.num_symbols() {
        let est = pilot_estimate_from_input(input, pattern, col);
        let filtered = filter.apply(&est);
        for (k, v) in interpolate_full(&filtered, n)?.into_iter().enumerate() {
            data[(k, col)] = v;
        }
    }
    Ok(ChannelMatrix::new(data))
}

/// Evaluate models and baselines on a test set. One row per estimator; the
/// LMMSE/MMSE filters use the set's true operating SNR and the dataset's
/// pilot autocorrelation.
pub fn evaluate(
    models: &[(&TrainedModel, String)],
    test: &Dataset,
    autocorr: &ChannelAutocorrelation,
    baselines: BaselineSet,
) -> Result<Vec<MseRow>> {
    if test.samples.is_empty() {
        return Err(Error::Input("empty test set".into()));
    }
    let pattern = PilotPattern::comb(test.num_subcarriers, test.condition.pilots)?;
    for (model, name) in models {
        let side = model.meta.architecture.min_input_side();
        if test.num_subcarriers < side || test.num_symbols < side {
            return Err(Error::Config(format!(
                "test grid {}x{} smaller than {name} kernels ({side})",
                test.num_subcarriers, test.num_symbols
            )));
        }
    }
    let snr = test.condition.snr;
    let beta = beta_constant(&Constellation::new(test.condition.modulation))?;
    let lmmse_filter = baselines
        .lmmse
        .then(|| PilotFilter::lmmse(autocorr, beta, snr))
        .transpose()?;
    let mmse_filter = baselines
        .mmse
        .then(|| PilotFilter::mmse(autocorr, &pattern.pilot_symbols, snr.noise_variance()))
        .transpose()?;

    let mut ls_total = 0.0;
    let mut lmmse_total = 0.0;
    let mut mmse_total = 0.0;
    let mut model_totals = vec![0.0; models.len()];

    for sample in &test.samples {
        let truth = planes_to_complex(&sample.target)?;
        let input = planes_to_complex(&sample.input)?;
        if baselines.ls {
            ls_total += input.mse(&truth);
        }
        if let Some(filter) = &lmmse_filter {
            lmmse_total += refilter_full(&input, &pattern, filter)?.mse(&truth);
        }
        if let Some(filter) = &mmse_filter {
            mmse_total += refilter_full(&input, &pattern, filter)?.mse(&truth);
        }
        for ((model, _), total) in models.iter().zip(model_totals.iter_mut()) {
            *total += refine_sample(model, &sample.input)?.mse(&truth);
        }
    }

    let count = test.samples.len();
    let row = |estimator: &str, total: f64| MseRow {
        estimator: estimator.to_string(),
        snr,
        pilots: test.condition.pilots,
        modulation: test.condition.modulation,
        mse: total / count as f64,
        samples: count,
    };
    let mut rows = Vec::new();
    if baselines.ls {
        rows.push(row("ls", ls_total));
    }
    if lmmse_filter.is_some() {
        rows.push(row("lmmse", lmmse_total));
    }
    if mmse_filter.is_some() {
        rows.push(row("mmse", mmse_total));
    }
    for ((_, name), total) in models.iter().zip(model_totals) {
        rows.push(row(name, total));
    }
    Ok(rows)
}

/// MSE of the trivial estimators: perfect knowledge (exactly zero) and the
/// all-zero estimate (the mean channel power).
pub fn trivial_estimator_mse(test: &Dataset) -> Result<(f64, f64)> {
    if test.samples.is_empty() {
        return Err(Error::Input("empty test set".into()));
    }
    let mut perfect = 0.0;
    let mut zero = 0.0;
    for sample in &test.samples {
        let truth = planes_to_complex(&sample.target)?;
        perfect += truth.mse(&truth);
        zero += truth.mean_power();
    }
    let count = test.samples.len() as f64;
    Ok((perfect / count, zero / count))
}

/// Does the plane mode match a checkpoint's channel count.
pub fn mode_matches(mode: PlaneMode, model: &TrainedModel) -> bool {
    mode.io_channels() == model.meta.io_channels
}
