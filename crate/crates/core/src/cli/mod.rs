//! Command-line surface: `gen-data`, `train`, `eval`, `sweep` and `replay`.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical divergence,
//! 5 incompatible inputs. Every command writes a `run.toml` manifest into
//! its output directory; `replay` re-executes one.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exec::Exec;
use crate::losses::DEFAULT_CONTRASTIVE_TAU;
use crate::trainer::{Optimizer, Variant};

pub use manifest::{RunManifest, RUN_MANIFEST};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_COMPAT: i32 = 5;

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn compat(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_COMPAT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Param { .. } | Error::Label(_) | Error::UnsupportedLabels(_) | Error::Capacity { .. } => {
                EXIT_USAGE
            }
            Error::Io { .. } | Error::Format { .. } => EXIT_IO,
            Error::Diverged { .. } => EXIT_DIVERGED,
            Error::Shape(_) | Error::Compat(_) => EXIT_COMPAT,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sphash",
    version,
    about = "Self-paced cross-modal hashing under noisy labels",
    args_override_self = true,
    after_help = "Any flag may also come from `--config FILE` (TOML, keys are flag names, \
                  optional per-subcommand tables); command-line flags override the file."
)]
pub struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-modal dataset, split it and corrupt the
    /// training labels.
    GenData(GenDataArgs),
    /// Train hash functions on a generated dataset.
    Train(TrainArgs),
    /// Score a checkpoint on the test split.
    Eval(EvalArgs),
    /// Train and evaluate over noise rates x code lengths x variants.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a run manifest.
    Replay(ReplayArgs),
}

/// Shape of the synthetic data.
#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of instances.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Number of classes.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Number of modalities.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Feature dimension of each modality, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,48")]
    pub dims: Vec<usize>,
    /// Minimum Euclidean distance between class latents.
    #[arg(long, default_value_t = 5.0)]
    pub class_separation: f64,
    /// Standard deviation of per-instance latent noise.
    #[arg(long, default_value_t = 1.0)]
    pub intra_noise_std: f64,
    /// Dimension of the shared latent space.
    #[arg(long, default_value_t = 16)]
    pub latent_dim: usize,
    /// Fraction of instances in the training split.
    #[arg(long, default_value_t = crate::benchmark::TRAIN_FRAC)]
    pub train_frac: f64,
    /// Fraction of instances in the validation split.
    #[arg(long, default_value_t = crate::benchmark::VAL_FRAC)]
    pub val_frac: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Fraction of training labels replaced by a different, uniformly drawn class.
    #[arg(long, default_value_t = 0.0)]
    pub noise_rate: f64,
    /// Base seed of generation, splitting and corruption.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Optimization and loss settings shared by `train` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Hidden units of each modality's hash network.
    #[arg(long, default_value_t = 256)]
    pub hidden: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    /// Warm-up epochs trained without self-paced weights.
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Total epochs.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Step size.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Update rule.
    #[arg(long, value_enum, default_value_t = OptimizerArg::AdaptiveMoments)]
    pub optimizer: OptimizerArg,
    /// Temperature of the center softmax.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Temperature of the contrastive softmax.
    #[arg(long, default_value_t = DEFAULT_CONTRASTIVE_TAU)]
    pub tau_contrastive: f64,
    /// Weight factor of the GCE-form loss, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Weight of the contrastive term.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Fixed pace parameter. Defaults to half the largest attainable
    /// per-instance loss; with `--variant gamma_override` it sets the
    /// override value instead (default 200).
    #[arg(long, conflicts_with = "gamma_ramp")]
    pub gamma: Option<f64>,
    /// Linear pace ramp `START,END,EPOCHS` over the self-paced epochs.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub gamma_ramp: Option<Vec<f64>>,
    /// Score validation retrieval with the true labels.
    #[arg(long)]
    pub clean_val: bool,
    /// Evaluate validation MAP every this many epochs (and at the last).
    #[arg(long, default_value_t = 1)]
    pub eval_every: usize,
    /// Training seed (sweeps derive per-cell seeds from it).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    AdaptiveMoments,
}

impl From<OptimizerArg> for Optimizer {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::AdaptiveMoments => Optimizer::AdaptiveMoments,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Dataset directory (or its `dataset.toml`).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Code length in bits.
    #[arg(long, default_value_t = 32)]
    pub bits: usize,
    /// Ablation variant: full, no_warmup, no_chl, no_spl, binarize_weights
    /// or gamma_override.
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    pub variant: Variant,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Dataset directory (or its `dataset.toml`).
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Weight dump for noise detection; defaults to `weights.csv` next to
    /// the checkpoint when present.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Points on each precision-recall curve.
    #[arg(long, default_value_t = 11)]
    pub pr_points: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Noise rates, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
    pub noise_rates: Vec<f64>,
    /// Code lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "32")]
    pub bits: Vec<usize>,
    /// Variants, comma separated (see `train --variant`).
    #[arg(long, value_delimiter = ',', default_value = "full", value_parser = parse_variant)]
    pub variants: Vec<Variant>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A `run.toml` written by any command.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = config::expand(args.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return if code == EXIT_OK {
                Ok(())
            } else {
                Err(CliError {
                    code,
                    message: String::new(),
                })
            };
        }
    };
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.command {
        Command::GenData(a) => commands::gen_data(&a, exec),
        Command::Train(a) => commands::train(&a, exec),
        Command::Eval(a) => commands::eval(&a, exec),
        Command::Sweep(a) => commands::sweep(&a, exec),
        Command::Replay(a) => commands::replay(&a, cli.sequential),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(std::env::args_os()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {e}");
            }
            e.code
        }
    }
}
