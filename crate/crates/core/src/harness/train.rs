//! Mini-batch Adam training of a super-resolution model on LS-estimate
//! planes. Inputs are normalized, outputs denormalized before the loss, so
//! losses are in physical channel units throughout.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{fit_normalization, Dataset, NormalizationStats, Sample};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, PlaneMode, SeedSet, TrainSchedule};
use crate::models::{build_model_with_channels, ArchitectureSpec};
use crate::nn::{mse_loss, Model, ModelOptimizer, Tensor4};
use crate::ofdm::ModulationKind;
use crate::seeds;

/// Everything a checkpoint records besides the parameters themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub architecture: ArchitectureSpec,
    pub io_channels: usize,
    pub channel: crate::ofdm::ChannelParams,
    pub pilots: usize,
    pub modulation: ModulationKind,
    pub train_snr_db: f64,
    pub interpolation: crate::estimators::InterpolationKind,
    pub schedule: TrainSchedule,
    pub seeds: SeedSet,
    pub train_frames: usize,
    pub val_frames: usize,
    pub variant: CheckpointVariant,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub final_val_loss: f64,
    pub train_loss_per_epoch: Vec<f64>,
    pub val_loss_per_epoch: Vec<f64>,
}

/// Whether a checkpoint was trained under exactly this configuration.
pub fn meta_matches(config: &ExperimentConfig, meta: &CheckpointMeta) -> bool {
    meta.architecture == config.architecture
        && meta.io_channels == config.plane_mode.io_channels()
        && meta.channel == config.channel
        && meta.pilots == config.pilots
        && meta.modulation == config.modulation
        && meta.train_snr_db == config.train_snr_db
        && meta.interpolation == config.interpolation
        && meta.schedule == config.schedule
        && meta.seeds == config.seeds
        && meta.train_frames == config.dataset_sizes.train
        && meta.val_frames == config.dataset_sizes.val
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointVariant {
    Final,
    BestValidation,
}

/// A trained model with its normalization and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    pub norm: NormalizationStats,
    pub meta: CheckpointMeta,
}

/// Both checkpoints produced by a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_model: TrainedModel,
    pub best_model: TrainedModel,
}

/// Per-epoch numbers handed to the progress callback.
#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

/// Index of one network sample within a dataset.
#[derive(Debug, Clone, Copy)]
enum PlaneRef {
    Real(usize),
    Imag(usize),
    Pair(usize),
}

fn plane_refs(ds: &Dataset, mode: PlaneMode) -> Vec<PlaneRef> {
    match mode {
        PlaneMode::Independent => (0..ds.samples.len())
            .flat_map(|i| [PlaneRef::Real(i), PlaneRef::Imag(i)])
            .collect(),
        PlaneMode::TwoChannel => (0..ds.samples.len()).map(PlaneRef::Pair).collect(),
    }
}

/// Copy the referenced planes into (input, target) batch tensors; inputs
/// are normalized, targets stay in channel units.
fn assemble_batch(
    ds: &Dataset,
    refs: &[PlaneRef],
    norm: &NormalizationStats,
    channels: usize,
) -> (Tensor4, Tensor4) {
    let (h, w) = (ds.num_subcarriers, ds.num_symbols);
    let mut input = Tensor4::zeros([refs.len(), channels, h, w]);
    let mut target = Tensor4::zeros([refs.len(), channels, h, w]);
    for (slot, r) in refs.iter().enumerate() {
        let fill = |src: &[f64], dst: &mut [f64], normalize: bool| {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = if normalize { norm.apply(s) } else { s };
            }
        };
        let sample = |i: &usize| -> &Sample { &ds.samples[*i] };
        match r {
            PlaneRef::Real(i) => {
                fill(&sample(i).input.real.data, input.plane_mut(slot, 0), true);
                fill(&sample(i).target.real.data, target.plane_mut(slot, 0), false);
            }
            PlaneRef::Imag(i) => {
                fill(&sample(i).input.imag.data, input.plane_mut(slot, 0), true);
                fill(&sample(i).target.imag.data, target.plane_mut(slot, 0), false);
            }
            PlaneRef::Pair(i) => {
                fill(&sample(i).input.real.data, input.plane_mut(slot, 0), true);
                fill(&sample(i).input.imag.data, input.plane_mut(slot, 1), true);
                fill(&sample(i).target.real.data, target.plane_mut(slot, 0), false);
                fill(&sample(i).target.imag.data, target.plane_mut(slot, 1), false);
            }
        }
    }
    (input, target)
}

/// Denormalize a network output in place.
fn denormalize(t: &mut Tensor4, norm: &NormalizationStats) {
    t.as_mut_slice().iter_mut().for_each(|v| *v = norm.invert(*v));
}

/// Mean per-sample loss of a model over a dataset, batched.
fn dataset_loss(
    model: &Model,
    ds: &Dataset,
    norm: &NormalizationStats,
    mode: PlaneMode,
    batch_planes: usize,
) -> Result<f64> {
    let refs = plane_refs(ds, mode);
    let channels = mode.io_channels();
    let mut total = 0.0;
    for chunk in refs.chunks(batch_planes.max(1)) {
        let (input, target) = assemble_batch(ds, chunk, norm, channels);
        let mut out = model.forward(&input)?;
        denormalize(&mut out, norm);
        let (loss, _) = mse_loss(&out, &target)?;
        total += loss * chunk.len() as f64;
    }
    Ok(total / refs.len().max(1) as f64)
}

/// Train the configured architecture on (train, val) datasets.
///
/// Deterministic given the config seeds. Returns the final model and the
/// best-validation snapshot; training aborts with epoch/batch context if
/// the loss stops being finite.
pub fn train(
    config: &ExperimentConfig,
    train_ds: &Dataset,
    val_ds: &Dataset,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_ds.samples.is_empty() {
        return Err(Error::Config("training dataset is empty".into()));
    }
    let schedule = &config.schedule;
    let mode = config.plane_mode;
    let channels = mode.io_channels();
    let norm = fit_normalization(train_ds)?;
    let mut model =
        build_model_with_channels(&config.architecture, config.seeds.init, channels)?;
    let mut optimizer = ModelOptimizer::new(&model);

    let batch_planes = match mode {
        PlaneMode::Independent => schedule.batch_frames * 2,
        PlaneMode::TwoChannel => schedule.batch_frames,
    };
    let mut refs = plane_refs(train_ds, mode);

    let mut train_losses = Vec::with_capacity(schedule.epochs);
    let mut val_losses = Vec::with_capacity(schedule.epochs);
    let mut best: Option<(usize, f64, Model)> = None;

    for epoch in 0..schedule.epochs {
        let lr = schedule.lr_at(epoch);
        let mut rng = seeds::rng(seeds::stream(
            config.seeds.shuffle,
            seeds::salt::SHUFFLE,
            epoch as u64,
        ));
        refs.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in refs.chunks(batch_planes).enumerate() {
            let (input, target) = assemble_batch(train_ds, chunk, &norm, channels);
            let cache = model.forward_cached(&input)?;
            let mut pred = cache.output().clone();
            denormalize(&mut pred, &norm);
            let (loss, grad_pred) = mse_loss(&pred, &target)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "training diverged at epoch {epoch}, batch {batch_idx}: loss {loss}"
                )));
            }
            epoch_loss += loss * chunk.len() as f64;
            // d pred / d raw output is the normalization scale.
            let mut grad_raw = grad_pred;
            grad_raw
                .as_mut_slice()
                .iter_mut()
                .for_each(|g| *g *= norm.std);
            let (grads, _) = model.backward(&cache, &grad_raw, false)?;
            optimizer.step(&mut model, &grads, lr).map_err(|e| {
                Error::Numeric(format!("epoch {epoch}, batch {batch_idx}: {e}"))
            })?;
        }
        let train_loss = epoch_loss / refs.len() as f64;
        let val_loss = if val_ds.samples.is_empty() {
            f64::NAN
        } else {
            dataset_loss(&model, val_ds, &norm, mode, batch_planes)?
        };
        train_losses.push(train_loss);
        val_losses.push(val_loss);
        if !val_loss.is_nan() && best.as_ref().map_or(true, |(_, b, _)| val_loss < *b) {
            best = Some((epoch, val_loss, model.clone()));
        }
        on_epoch(&EpochStats {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
    }

    let (best_epoch, best_val_loss, best_model) = match best {
        Some((e, l, m)) => (e, l, m),
        None => (
            schedule.epochs - 1,
            *val_losses.last().unwrap_or(&f64::NAN),
            model.clone(),
        ),
    };
    let final_val_loss = *val_losses.last().unwrap_or(&f64::NAN);
    let meta = CheckpointMeta {
        architecture: config.architecture,
        io_channels: channels,
        channel: config.channel.clone(),
        pilots: config.pilots,
        modulation: config.modulation,
        train_snr_db: config.train_snr_db,
        interpolation: config.interpolation,
        schedule: schedule.clone(),
        seeds: config.seeds,
        train_frames: train_ds.samples.len(),
        val_frames: val_ds.samples.len(),
        variant: CheckpointVariant::Final,
        best_epoch,
        best_val_loss,
        final_val_loss,
        train_loss_per_epoch: train_losses,
        val_loss_per_epoch: val_losses,
    };
    let best_meta = CheckpointMeta {
        variant: CheckpointVariant::BestValidation,
        ..meta.clone()
    };
    Ok(TrainOutcome {
        final_model: TrainedModel {
            model,
            norm,
            meta,
        },
        best_model: TrainedModel {
            model: best_model,
            norm,
            meta: best_meta,
        },
    })
}
