//! Training, evaluation, experiment sweeps, checkpoints, and reports.

pub mod checkpoint;
pub mod config;
pub mod evaluate;
pub mod report;
pub mod sweep;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{
    DatasetSizes, ExperimentConfig, PlaneMode, SeedSet, TrainSchedule, OUT_DIR_ENV,
};
pub use evaluate::{evaluate, BaselineSet};
pub use report::{emit_report, load_report, mse_db, MseReport, MseRow, ReportMeta};
pub use sweep::{
    estimate_autocorrelation, generate_split, sweep_layers, sweep_mismatch, sweep_pilots,
    sweep_snr, ModelCache,
};
pub use train::{train, CheckpointMeta, CheckpointVariant, EpochStats, TrainOutcome, TrainedModel};
