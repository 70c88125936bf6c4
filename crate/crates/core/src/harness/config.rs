//! Experiment configuration: one struct describes a full condition
//! (channel, pilots, modulation, SNRs, architecture, schedule, sizes,
//! seeds). Loaded from TOML with every field optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::InterpolationKind;
use crate::models::ArchitectureSpec;
use crate::ofdm::{ChannelParams, ModulationKind};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SRCE_OUT_DIR";

/// Mini-batch Adam schedule with stepwise learning-rate decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    /// OFDM frames per batch; each frame contributes two plane samples.
    pub batch_frames: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub decay_factor: f64,
    pub decay_every_epochs: usize,
}

impl TrainSchedule {
    /// Reference schedule: 800 epochs, decay 5-fold every 200.
    pub fn paper() -> Self {
        TrainSchedule {
            batch_frames: 100,
            epochs: 800,
            initial_lr: 1e-3,
            decay_factor: 5.0,
            decay_every_epochs: 200,
        }
    }

    /// Desk-scale schedule: same shape, 100 epochs with decay every 25.
    pub fn desk() -> Self {
        TrainSchedule {
            batch_frames: 100,
            epochs: 100,
            initial_lr: 1e-3,
            decay_factor: 5.0,
            decay_every_epochs: 25,
        }
    }

    /// lr(e) = initial / factor^floor(e / decay_every).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.initial_lr / self.decay_factor.powi((epoch / self.decay_every_epochs) as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_frames == 0
            || self.epochs == 0
            || self.decay_every_epochs == 0
            || self.initial_lr <= 0.0
            || self.decay_factor <= 0.0
        {
            return Err(Error::Config("schedule fields must be positive".into()));
        }
        Ok(())
    }
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule::desk()
    }
}

/// Frame counts per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for DatasetSizes {
    fn default() -> Self {
        DatasetSizes {
            train: 4000,
            val: 500,
            test: 1000,
        }
    }
}

/// The four independent random streams of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub channel: u64,
    pub noise: u64,
    pub init: u64,
    pub shuffle: u64,
}

impl Default for SeedSet {
    fn default() -> Self {
        SeedSet {
            channel: 0x5ece_0001,
            noise: 0x5ece_0002,
            init: 0x5ece_0003,
            shuffle: 0x5ece_0004,
        }
    }
}

/// How the two planes of a frame enter the network: as two independent
/// single-channel samples (default) or stacked as one two-channel sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneMode {
    Independent,
    TwoChannel,
}

impl Default for PlaneMode {
    fn default() -> Self {
        PlaneMode::Independent
    }
}

impl PlaneMode {
    pub fn io_channels(self) -> usize {
        match self {
            PlaneMode::Independent => 1,
            PlaneMode::TwoChannel => 2,
        }
    }
}

fn default_modulation() -> ModulationKind {
    ModulationKind::Qpsk
}

fn default_pilots() -> usize {
    8
}

fn default_train_snr() -> f64 {
    20.0
}

fn default_grid() -> Vec<f64> {
    vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
}

fn default_architecture() -> ArchitectureSpec {
    ArchitectureSpec::fsrcnn(4)
}

fn default_autocorr_channels() -> usize {
    2000
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default = "default_pilots")]
    pub pilots: usize,
    #[serde(default = "default_modulation")]
    pub modulation: ModulationKind,
    #[serde(default = "default_train_snr")]
    pub train_snr_db: f64,
    #[serde(default = "default_grid")]
    pub test_snr_grid_db: Vec<f64>,
    #[serde(default = "default_architecture")]
    pub architecture: ArchitectureSpec,
    #[serde(default)]
    pub schedule: TrainSchedule,
    #[serde(default)]
    pub dataset_sizes: DatasetSizes,
    #[serde(default)]
    pub seeds: SeedSet,
    #[serde(default)]
    pub interpolation: InterpolationKind,
    #[serde(default)]
    pub plane_mode: PlaneMode,
    /// Ground-truth channels used to estimate the pilot autocorrelation.
    #[serde(default = "default_autocorr_channels")]
    pub autocorr_channels: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            channel: ChannelParams::default(),
            pilots: default_pilots(),
            modulation: default_modulation(),
            train_snr_db: default_train_snr(),
            test_snr_grid_db: default_grid(),
            architecture: default_architecture(),
            schedule: TrainSchedule::default(),
            dataset_sizes: DatasetSizes::default(),
            seeds: SeedSet::default(),
            interpolation: InterpolationKind::default(),
            plane_mode: PlaneMode::default(),
            autocorr_channels: default_autocorr_channels(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.schedule.validate()?;
        self.architecture.validate()?;
        if self.pilots == 0 || self.channel.num_subcarriers % self.pilots != 0 {
            return Err(Error::Config(format!(
                "pilot count {} must divide {} subcarriers",
                self.pilots, self.channel.num_subcarriers
            )));
        }
        if self.test_snr_grid_db.is_empty() {
            return Err(Error::Config("test SNR grid must be non-empty".into()));
        }
        if self.autocorr_channels == 0 {
            return Err(Error::Config("autocorr_channels must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
