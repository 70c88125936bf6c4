//! Experiment orchestration: dataset generation, per-condition training
//! with a reusable model cache, evaluation across the SNR grid, and the
//! four figure sweeps. Partial reports are flushed after every condition.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::dataset::{generate_dataset, Dataset, Split};
use crate::error::Result;
use crate::estimators::{empirical_autocorrelation, ChannelAutocorrelation};
use crate::harness::config::ExperimentConfig;
use crate::harness::evaluate::{evaluate, BaselineSet};
use crate::harness::report::{emit_report, MseReport, MseRow};
use crate::harness::train::{train, TrainOutcome};
use crate::harness::{checkpoint, train as train_mod};
use crate::models::ArchitectureSpec;
use crate::ofdm::{generate_channel, Constellation, PilotPattern, Snr};
use crate::seeds;

/// Progress sink for long-running operations.
pub type Progress<'a> = &'a mut dyn FnMut(&str);

/// No-op progress sink.
pub fn quiet() -> impl FnMut(&str) {
    |_: &str| {}
}

pub fn pattern_for(config: &ExperimentConfig) -> Result<PilotPattern> {
    PilotPattern::comb(config.channel.num_subcarriers, config.pilots)
}

pub fn constellation_for(config: &ExperimentConfig) -> Constellation {
    Constellation::new(config.modulation)
}

/// Generate one split at the given SNR with the configured seeds.
pub fn generate_split(
    config: &ExperimentConfig,
    split: Split,
    snr: Snr,
    count: usize,
) -> Result<Dataset> {
    generate_dataset(
        &config.channel,
        &pattern_for(config)?,
        &constellation_for(config),
        snr,
        split,
        count,
        config.seeds.channel,
        config.seeds.noise,
        config.interpolation,
    )
}

/// Pilot autocorrelation estimated from ground-truth channels of the
/// training stream.
pub fn estimate_autocorrelation(config: &ExperimentConfig) -> Result<ChannelAutocorrelation> {
    let pattern = pattern_for(config)?;
    let channels: Result<Vec<_>> = (0..config.autocorr_channels)
        .map(|idx| {
            generate_channel(
                &config.channel,
                seeds::stream(config.seeds.channel, Split::Train.salt(), idx as u64),
            )
        })
        .collect();
    empirical_autocorrelation(&channels?, &pattern)
}

/// Trained models keyed by their full condition, with optional on-disk
/// persistence so repeated runs skip finished trainings.
#[derive(Default)]
pub struct ModelCache {
    memory: HashMap<String, TrainOutcome>,
    disk_dir: Option<PathBuf>,
}

impl ModelCache {
    pub fn new() -> Self {
        ModelCache::default()
    }

    /// Persist checkpoints under `dir`, reloading matching ones on demand.
    pub fn persistent(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
        Ok(ModelCache {
            memory: HashMap::new(),
            disk_dir: Some(dir.to_path_buf()),
        })
    }

    fn condition_name(config: &ExperimentConfig) -> String {
        format!(
            "{}_{}_p{}_tr{}_e{}_n{}",
            config.architecture.name(),
            config.modulation,
            config.pilots,
            config.train_snr_db,
            config.schedule.epochs,
            config.dataset_sizes.train
        )
    }

    fn key(config: &ExperimentConfig) -> String {
        // The full condition; anything that changes training invalidates it.
        serde_json::to_string(&(
            &config.channel,
            config.pilots,
            config.modulation,
            config.train_snr_db,
            &config.architecture,
            &config.schedule,
            &config.dataset_sizes.train,
            &config.dataset_sizes.val,
            &config.seeds,
            config.interpolation,
            config.plane_mode,
        ))
        .expect("config serializes")
    }

    /// Train the configured condition, or return the cached/persisted model.
    pub fn train_or_get(
        &mut self,
        config: &ExperimentConfig,
        progress: Progress,
    ) -> Result<TrainOutcome> {
        let key = Self::key(config);
        if let Some(hit) = self.memory.get(&key) {
            return Ok(hit.clone());
        }
        let name = Self::condition_name(config);
        if let Some(dir) = &self.disk_dir {
            let base = dir.join(&name);
            let best_base = dir.join(format!("{name}_best"));
            if checkpoint::manifest_path(&base).exists() {
                if let Ok(final_model) = checkpoint::load_checkpoint(&base) {
                    if train_mod::meta_matches(config, &final_model.meta) {
                        if let Ok(best_model) = checkpoint::load_checkpoint(&best_base) {
                            progress(&format!("[cache] loaded checkpoint {name}"));
                            let outcome = TrainOutcome {
                                final_model,
                                best_model,
                            };
                            self.memory.insert(key, outcome.clone());
                            return Ok(outcome);
                        }
                    }
                }
            }
        }

        progress(&format!("[train] {name}"));
        let train_ds = generate_split(
            config,
            Split::Train,
            Snr::Db(config.train_snr_db),
            config.dataset_sizes.train,
        )?;
        let val_ds = generate_split(
            config,
            Split::Val,
            Snr::Db(config.train_snr_db),
            config.dataset_sizes.val,
        )?;
        let outcome = train(config, &train_ds, &val_ds, |stats| {
            progress(&format!(
                "[train] {name} epoch {:>4}  lr {:.2e}  train {:.6e}  val {:.6e}",
                stats.epoch, stats.lr, stats.train_loss, stats.val_loss
            ));
        })?;
        if let Some(dir) = &self.disk_dir {
            checkpoint::save_checkpoint(&outcome.final_model, &dir.join(&name))?;
            checkpoint::save_checkpoint(&outcome.best_model, &dir.join(format!("{name}_best")))?;
        }
        self.memory.insert(key, outcome.clone());
        Ok(outcome)
    }
}

/// Train one condition and evaluate it (plus baselines when requested)
/// across the test SNR grid. `estimator_name` overrides the architecture
/// name in the report rows.
fn condition_rows(
    config: &ExperimentConfig,
    cache: &mut ModelCache,
    include_baselines: bool,
    estimator_name: Option<String>,
    progress: Progress,
) -> Result<Vec<MseRow>> {
    config.validate()?;
    let outcome = cache.train_or_get(config, progress)?;
    let autocorr = estimate_autocorrelation(config)?;
    let name = estimator_name.unwrap_or_else(|| config.architecture.name());
    let baselines = if include_baselines {
        BaselineSet::all()
    } else {
        BaselineSet::none()
    };
    let mut rows = Vec::new();
    for &snr_db in &config.test_snr_grid_db {
        let test = generate_split(
            config,
            Split::Test,
            Snr::Db(snr_db),
            config.dataset_sizes.test,
        )?;
        progress(&format!(
            "[eval] {} at {snr_db} dB ({} frames)",
            name, config.dataset_sizes.test
        ));
        rows.extend(evaluate(
            &[(&outcome.final_model, name.clone())],
            &test,
            &autocorr,
            baselines,
        )?);
    }
    Ok(rows)
}

fn flush(report: &MseReport, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        emit_report(report, path, None)?;
    }
    Ok(())
}

/// One model trained at the configured SNR, evaluated across the grid
/// against LS/LMMSE/MMSE.
pub fn sweep_snr(
    config: &ExperimentConfig,
    cache: &mut ModelCache,
    out: Option<&Path>,
    progress: Progress,
) -> Result<MseReport> {
    let mut report = MseReport::default();
    report.extend(condition_rows(config, cache, true, None, progress)?);
    flush(&report, out)?;
    Ok(report)
}

/// One model per pilot count, all else fixed.
pub fn sweep_pilots(
    config: &ExperimentConfig,
    pilot_counts: &[usize],
    cache: &mut ModelCache,
    out: Option<&Path>,
    progress: Progress,
) -> Result<MseReport> {
    let mut report = MseReport::default();
    for &pilots in pilot_counts {
        let condition = ExperimentConfig {
            pilots,
            ..config.clone()
        };
        // Baselines depend on the pilot pattern, so every count gets them.
        let rows = condition_rows(&condition, cache, true, None, progress)?;
        report.extend(rows);
        flush(&report, out)?;
    }
    Ok(report)
}

/// One FSRCNN-x model per mapping-layer count.
pub fn sweep_layers(
    config: &ExperimentConfig,
    mapping_layers: &[usize],
    cache: &mut ModelCache,
    out: Option<&Path>,
    progress: Progress,
) -> Result<MseReport> {
    let mut report = MseReport::default();
    for (idx, &x) in mapping_layers.iter().enumerate() {
        let condition = ExperimentConfig {
            architecture: ArchitectureSpec::fsrcnn(x),
            ..config.clone()
        };
        let rows = condition_rows(&condition, cache, idx == 0, None, progress)?;
        report.extend(rows);
        flush(&report, out)?;
    }
    Ok(report)
}

/// One model per training SNR, each tested across the whole grid. Model
/// rows are tagged with their training SNR.
pub fn sweep_mismatch(
    config: &ExperimentConfig,
    train_snrs_db: &[f64],
    cache: &mut ModelCache,
    out: Option<&Path>,
    progress: Progress,
) -> Result<MseReport> {
    let mut report = MseReport::default();
    for (idx, &train_snr) in train_snrs_db.iter().enumerate() {
        let condition = ExperimentConfig {
            train_snr_db: train_snr,
            ..config.clone()
        };
        let name = format!("{}-tr{}", config.architecture.name(), train_snr);
        let rows = condition_rows(&condition, cache, idx == 0, Some(name), progress)?;
        report.extend(rows);
        flush(&report, out)?;
    }
    Ok(report)
}
