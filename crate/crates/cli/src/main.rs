//! `srce`: OFDM channel-estimation experiments from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use srce_core::dataset::{write_dataset, Split};
use srce_core::harness::{
    emit_report, estimate_autocorrelation, evaluate, generate_split, load_checkpoint, load_report,
    mse_db, save_checkpoint, sweep_layers, sweep_mismatch, sweep_pilots, sweep_snr, BaselineSet,
    ExperimentConfig, ModelCache, MseReport, ReportMeta, TrainSchedule, OUT_DIR_ENV,
};
use srce_core::ofdm::Snr;

#[derive(Parser)]
#[command(name = "srce", version, about = "Super-resolution OFDM channel estimation testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the full-scale training schedule (800 epochs, decay every 200).
    #[arg(long)]
    paper_scale: bool,
    /// Override the pilot count.
    #[arg(long)]
    pilots: Option<usize>,
    /// Override the modulation (qpsk | qam16).
    #[arg(long)]
    modulation: Option<String>,
    /// Override the training SNR in dB.
    #[arg(long)]
    train_snr_db: Option<f64>,
    /// Override the number of training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory (falls back to $SRCE_OUT_DIR, then ".").
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            config.schedule = TrainSchedule::paper();
        }
        if let Some(p) = self.pilots {
            config.pilots = p;
        }
        if let Some(m) = &self.modulation {
            config.modulation = match m.as_str() {
                "qpsk" => srce_core::ofdm::ModulationKind::Qpsk,
                "qam16" | "16qam" => srce_core::ofdm::ModulationKind::Qam16,
                other => bail!("unknown modulation {other}"),
            };
        }
        if let Some(snr) = self.train_snr_db {
            config.train_snr_db = snr;
        }
        if let Some(e) = self.epochs {
            config.schedule.epochs = e;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset split and write it to disk.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        split: SplitArg,
        /// Frame count (defaults to the configured split size).
        #[arg(long)]
        count: Option<usize>,
        /// SNR of the generated frames (defaults to the training SNR).
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Train the configured architecture; writes final and best checkpoints.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate a checkpoint against the baselines across the test SNR grid.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Checkpoint base path (without .json/.bin).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Report output path (defaults to <out>/report.csv).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one of the experiment sweeps.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(subcommand)]
        which: SweepKind,
    },
    /// Pretty-print a report, optionally with a dB column.
    Report {
        /// Report CSV produced by evaluate or sweep.
        #[arg(long)]
        input: PathBuf,
        /// Add a 10*log10(mse) column.
        #[arg(long)]
        db: bool,
    },
}

#[derive(Subcommand)]
enum SweepKind {
    /// One model, evaluated across the SNR grid.
    Snr,
    /// One model per pilot count.
    Pilots {
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        counts: Vec<usize>,
    },
    /// One FSRCNN-x model per mapping-layer count.
    Layers {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        counts: Vec<usize>,
    },
    /// One model per training SNR, tested across the grid.
    Mismatch {
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
        train_snrs: Vec<f64>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate {
            config,
            split,
            count,
            snr_db,
        } => generate(config, split.into(), count, snr_db),
        Command::Train { config } => train(config),
        Command::Evaluate {
            config,
            checkpoint,
            report,
        } => run_evaluate(config, &checkpoint, report),
        Command::Sweep { config, which } => sweep(config, which),
        Command::Report { input, db } => print_report(&input, db),
    }
}

fn generate(args: ConfigArgs, split: Split, count: Option<usize>, snr_db: Option<f64>) -> Result<()> {
    let config = args.load()?;
    let out_dir = args.out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let count = count.unwrap_or(match split {
        Split::Train => config.dataset_sizes.train,
        Split::Val => config.dataset_sizes.val,
        Split::Test => config.dataset_sizes.test,
    });
    let snr = Snr::Db(snr_db.unwrap_or(config.train_snr_db));
    let ds = generate_split(&config, split, snr, count)?;
    let name = format!(
        "{}_{}p_{}_snr{}.ds",
        split.as_str(),
        config.pilots,
        config.modulation,
        snr
    );
    let path = out_dir.join(name);
    write_dataset(&ds, &path)?;
    println!("wrote {} frames to {}", count, path.display());
    Ok(())
}

fn condition_stem(config: &ExperimentConfig) -> String {
    format!(
        "{}_{}_p{}_tr{}",
        config.architecture.name(),
        config.modulation,
        config.pilots,
        config.train_snr_db
    )
}

fn train(args: ConfigArgs) -> Result<()> {
    let config = args.load()?;
    let out_dir = args.out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let train_ds = generate_split(
        &config,
        Split::Train,
        Snr::Db(config.train_snr_db),
        config.dataset_sizes.train,
    )?;
    let val_ds = generate_split(
        &config,
        Split::Val,
        Snr::Db(config.train_snr_db),
        config.dataset_sizes.val,
    )?;
    println!(
        "training {} on {} frames ({} epochs)",
        config.architecture.name(),
        train_ds.samples.len(),
        config.schedule.epochs
    );
    let outcome = srce_core::harness::train(&config, &train_ds, &val_ds, |s| {
        println!(
            "epoch {:>4}  lr {:.2e}  train {:.6e}  val {:.6e}",
            s.epoch, s.lr, s.train_loss, s.val_loss
        );
    })?;
    let stem = condition_stem(&config);
    let final_base = out_dir.join(&stem);
    let best_base = out_dir.join(format!("{stem}_best"));
    save_checkpoint(&outcome.final_model, &final_base)?;
    save_checkpoint(&outcome.best_model, &best_base)?;
    println!(
        "wrote {}.json/.bin (final) and {}.json/.bin (best validation, epoch {})",
        final_base.display(),
        best_base.display(),
        outcome.best_model.meta.best_epoch
    );
    Ok(())
}

fn run_evaluate(args: ConfigArgs, checkpoint: &Path, report_path: Option<PathBuf>) -> Result<()> {
    let config = args.load()?;
    let out_dir = args.out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let model = load_checkpoint(checkpoint)
        .with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let autocorr = estimate_autocorrelation(&config)?;
    let name = model.meta.architecture.name();
    let mut report = MseReport::default();
    for &snr_db in &config.test_snr_grid_db {
        let test = generate_split(
            &config,
            Split::Test,
            Snr::Db(snr_db),
            config.dataset_sizes.test,
        )?;
        println!("evaluating at {snr_db} dB over {} frames", test.samples.len());
        report.extend(evaluate(
            &[(&model, name.clone())],
            &test,
            &autocorr,
            BaselineSet::all(),
        )?);
    }
    let path = report_path.unwrap_or_else(|| out_dir.join("report.csv"));
    emit_report(
        &report,
        &path,
        Some(&ReportMeta {
            description: format!("evaluation of {}", checkpoint.display()),
            config,
        }),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(args: ConfigArgs, which: SweepKind) -> Result<()> {
    let config = args.load()?;
    let out_dir = args.out_dir();
    std::fs::create_dir_all(&out_dir)?;
    let mut cache = ModelCache::persistent(&out_dir.join("models"))?;
    let mut progress = |msg: &str| println!("{msg}");
    let (name, report) = match which {
        SweepKind::Snr => {
            let path = out_dir.join("sweep_snr.csv");
            let r = sweep_snr(&config, &mut cache, Some(&path), &mut progress)?;
            ("snr", (path, r))
        }
        SweepKind::Pilots { counts } => {
            let path = out_dir.join("sweep_pilots.csv");
            let r = sweep_pilots(&config, &counts, &mut cache, Some(&path), &mut progress)?;
            ("pilots", (path, r))
        }
        SweepKind::Layers { counts } => {
            let path = out_dir.join("sweep_layers.csv");
            let r = sweep_layers(&config, &counts, &mut cache, Some(&path), &mut progress)?;
            ("layers", (path, r))
        }
        SweepKind::Mismatch { train_snrs } => {
            let path = out_dir.join("sweep_mismatch.csv");
            let r = sweep_mismatch(&config, &train_snrs, &mut cache, Some(&path), &mut progress)?;
            ("mismatch", (path, r))
        }
    };
    let (path, report) = report;
    emit_report(
        &report,
        &path,
        Some(&ReportMeta {
            description: format!("{name} sweep"),
            config,
        }),
    )?;
    println!("sweep complete: {} rows in {}", report.rows.len(), path.display());
    Ok(())
}

fn print_report(input: &Path, db: bool) -> Result<()> {
    let report = load_report(input)?;
    if db {
        println!(
            "{:<20} {:>8} {:>7} {:>7} {:>14} {:>10} {:>9}",
            "estimator", "snr_db", "pilots", "mod", "mse", "mse_db", "samples"
        );
    } else {
        println!(
            "{:<20} {:>8} {:>7} {:>7} {:>14} {:>9}",
            "estimator", "snr_db", "pilots", "mod", "mse", "samples"
        );
    }
    for r in &report.rows {
        if db {
            println!(
                "{:<20} {:>8} {:>7} {:>7} {:>14.6e} {:>10.3} {:>9}",
                r.estimator,
                r.snr.to_string(),
                r.pilots,
                r.modulation.to_string(),
                r.mse,
                mse_db(r.mse),
                r.samples
            );
        } else {
            println!(
                "{:<20} {:>8} {:>7} {:>7} {:>14.6e} {:>9}",
                r.estimator,
                r.snr.to_string(),
                r.pilots,
                r.modulation.to_string(),
                r.mse,
                r.samples
            );
        }
    }
    Ok(())
}
