//! Command-line frontend for the SWD detection pipeline.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use swd::classifier::{load_model, save_model, ScalingMode};
use swd::error::{Error, Result};
use swd::features::{load_features_csv, save_features_csv};
use swd::harness::{
    augment_patient, evaluate, featurize_recording, run_end_to_end, run_pipeline, train,
    FeaturizeOptions,
};
use swd::segmenter::WindowSpec;
use swd::signal_model::{load_annotations_json, load_recording_csv};
use swd::synthgen::{gen_dataset, write_dataset};

#[derive(Parser)]
#[command(
    name = "swd",
    about = "Spike-and-wave discharge detection in EEG recordings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    /// Z-score standardization fitted on the training set (default).
    Zscore,
    /// Raw Euclidean distances on unscaled features.
    Raw,
}

impl From<ScalingArg> for ScalingMode {
    fn from(v: ScalingArg) -> Self {
        match v {
            ScalingArg::Zscore => ScalingMode::ZScore,
            ScalingArg::Raw => ScalingMode::Identity,
        }
    }
}

#[derive(Args)]
struct WindowArgs {
    /// Window length in seconds.
    #[arg(long, default_value_t = 2.0)]
    window_s: f64,
    /// Window overlap in seconds.
    #[arg(long, default_value_t = 1.0)]
    overlap_s: f64,
    /// Lower edge of the wavelet band in Hz.
    #[arg(long, default_value_t = 1.0)]
    f_min: f64,
    /// Upper edge of the wavelet band in Hz.
    #[arg(long, default_value_t = 3.0)]
    f_max: f64,
    /// Number of log-spaced wavelet scales.
    #[arg(long, default_value_t = 21)]
    n_scales: usize,
}

impl WindowArgs {
    fn to_options(&self) -> Result<FeaturizeOptions> {
        Ok(FeaturizeOptions {
            window: WindowSpec::new(self.window_s, self.overlap_s)?,
            f_min: self.f_min,
            f_max: self.f_max,
            n_scales: self.n_scales,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset as recording CSV + annotation JSON files.
    Generate {
        /// Number of SWD recordings.
        #[arg(long, default_value_t = 106)]
        n_swd: usize,
        /// Number of background recordings.
        #[arg(long, default_value_t = 106)]
        n_bg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract feature vectors from a recording CSV.
    Featurize {
        /// Recording CSV (`time_s,<label>,...`).
        #[arg(long)]
        recording: PathBuf,
        /// Optional annotation JSON; adds class labels to the output.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Output feature CSV.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Train a k-NN model from a labeled feature CSV.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Number of neighbors.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScalingArg::Zscore)]
        scaling: ScalingArg,
        /// Output model JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Add a new patient's SWD feature vectors (>= 10) to an existing model.
    Augment {
        #[arg(long)]
        model: PathBuf,
        /// Feature CSV whose SWD-labeled rows are added.
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every window of a recording with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        recording: PathBuf,
        /// Output CSV of per-window labels.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Evaluate a model against a labeled feature CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Optional report JSON path (the report always prints to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-segment CSV path.
        #[arg(long)]
        per_segment: Option<PathBuf>,
    },
    /// Export the three pairwise scatter files from a labeled feature CSV.
    Scatter {
        #[arg(long)]
        features: PathBuf,
        /// Output directory for the three CSV panels.
        #[arg(long)]
        out: PathBuf,
    },
    /// One-shot synthetic reproduction: generate, featurize, train, evaluate.
    EndToEnd {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScalingArg::Zscore)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 106)]
        n_train_swd: usize,
        #[arg(long, default_value_t = 106)]
        n_train_bg: usize,
        #[arg(long, default_value_t = 69)]
        n_test: usize,
        /// Exit nonzero unless accuracy reaches this threshold.
        #[arg(long, default_value_t = 0.95)]
        threshold: f64,
    },
}

fn verbose() -> bool {
    std::env::var("SWD_LOG").map_or(false, |v| v != "0" && !v.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate {
            n_swd,
            n_bg,
            seed,
            out,
        } => {
            let instances = gen_dataset(n_swd, n_bg, seed);
            write_dataset(&instances, &out)?;
            if verbose() {
                eprintln!("wrote {} recordings to {}", instances.len(), out.display());
            }
            Ok(true)
        }
        Command::Featurize {
            recording,
            annotations,
            out,
            window,
        } => {
            let rec = load_recording_csv(&recording)?;
            let anns = annotations
                .map(|p| load_annotations_json(p, &rec))
                .transpose()?;
            let features = featurize_recording(&rec, &window.to_options()?, anns.as_deref())?;
            save_features_csv(&features, &out)?;
            if verbose() {
                eprintln!("extracted {} feature vectors", features.len());
            }
            Ok(true)
        }
        Command::Train {
            features,
            k,
            scaling,
            out,
        } => {
            let feats = load_features_csv(&features)?;
            let model = train(feats, k, scaling.into())?;
            save_model(&model, &out)?;
            if verbose() {
                eprintln!(
                    "trained k={} model on {} points (n0={}, n1={})",
                    model.k,
                    model.train.len(),
                    model.train.n0(),
                    model.train.n1()
                );
            }
            Ok(true)
        }
        Command::Augment {
            model,
            features,
            out,
        } => {
            let m = load_model(&model)?;
            let feats = load_features_csv(&features)?;
            let m2 = augment_patient(&m, &feats)?;
            save_model(&m2, &out)?;
            Ok(true)
        }
        Command::Predict {
            model,
            recording,
            out,
            window,
        } => {
            let m = load_model(&model)?;
            let rec = load_recording_csv(&recording)?;
            let labels = run_pipeline(&rec, &m, &window.to_options()?)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            writeln!(f, "channel,start_index,label")?;
            for w in &labels {
                writeln!(
                    f,
                    "{},{},{}",
                    w.channel_label,
                    w.start_index,
                    w.label.map_or("skipped", |l| l.as_str())
                )?;
            }
            Ok(true)
        }
        Command::Evaluate {
            model,
            features,
            out,
            per_segment,
        } => {
            let m = load_model(&model)?;
            let feats = load_features_csv(&features)?;
            let report = evaluate(&m, &feats)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(p) = out {
                report.save_json(p)?;
            }
            if let Some(p) = per_segment {
                report.save_per_segment_csv(p)?;
            }
            Ok(true)
        }
        Command::Scatter { features, out } => {
            let feats = load_features_csv(&features)?;
            if feats.is_empty() {
                return Err(Error::EmptyTestSet);
            }
            std::fs::create_dir_all(&out)?;
            let panels: [(&str, fn(&swd::FeatureVector) -> (f64, f64)); 3] = [
                ("sigma_variance.csv", |f| (f.ggd_scale, f.variance)),
                ("sigma_median.csv", |f| (f.ggd_scale, f.median)),
                ("variance_median.csv", |f| (f.variance, f.median)),
            ];
            for (name, project) in panels {
                let mut f = std::io::BufWriter::new(std::fs::File::create(out.join(name))?);
                writeln!(f, "x,y,class")?;
                for fv in &feats {
                    let (x, y) = project(fv);
                    writeln!(
                        f,
                        "{:?},{:?},{}",
                        x,
                        y,
                        fv.label.map_or(-1i8, |l| l.index() as i8)
                    )?;
                }
            }
            Ok(true)
        }
        Command::EndToEnd {
            seed,
            k,
            scaling,
            n_train_swd,
            n_train_bg,
            n_test,
            threshold,
        } => {
            let report = run_end_to_end(
                seed,
                k,
                scaling.into(),
                n_train_swd,
                n_train_bg,
                n_test,
            )?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.accuracy >= threshold)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
