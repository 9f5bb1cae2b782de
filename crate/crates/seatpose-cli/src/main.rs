//! Pipeline driver. One configuration file feeds every subcommand; flags
//! override individual fields, and each run leaves a manifest tying outputs
//! to the exact inputs and settings that produced them.

mod commands;
mod context;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use seatpose::Error;

#[derive(Parser)]
#[command(name = "seatpose", version, about = "Seated pose estimation pipeline")]
struct Cli {
    /// Experiment configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config field, e.g. --set batch=16 or --set simulate.seconds_per_recording=10.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Shorthand for --set seed=N.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Shorthand for --set data_dir=PATH.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Shorthand for --set out_dir=PATH.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Mq,
    P2p,
    Baseline,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Mq => "mq",
            Stage::P2p => "p2p",
            Stage::Baseline => "baseline",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus into the data directory.
    Simulate,
    /// Train one pipeline stage and write its checkpoint.
    Train {
        #[arg(long, value_enum)]
        stage: Stage,
    },
    /// Cross-validated evaluation of trained checkpoints.
    Eval {
        /// Comma-separated stages to score.
        #[arg(long, default_value = "mq,p2p,baseline", value_delimiter = ',', value_enum)]
        stages: Vec<Stage>,
        /// Retrieval pool size for R-Precision.
        #[arg(long, default_value_t = 32)]
        rprecision_pool: usize,
        /// Top-k cutoff for R-Precision.
        #[arg(long, default_value_t = 3)]
        rprecision_k: usize,
    },
    /// Decode poses for one recording and report latency.
    Infer {
        /// Recording directory.
        #[arg(long)]
        recording: PathBuf,
    },
    /// Align raw pressure and pose streams on their start taps.
    Sync {
        /// Raw pressure tensor file.
        #[arg(long)]
        pressure: PathBuf,
        #[arg(long)]
        pressure_rate_hz: f64,
        /// Raw pose tensor file.
        #[arg(long)]
        pose: PathBuf,
        #[arg(long)]
        pose_rate_hz: f64,
        #[arg(long)]
        chair: String,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        activity: String,
        #[arg(long)]
        height_m: f64,
        #[arg(long)]
        mass_kg: f64,
        /// Name of the recording directory written under the data dir.
        #[arg(long, default_value = "synced")]
        out_name: String,
    },
    /// Posture report and figures for one recording.
    Report {
        /// Recording directory.
        #[arg(long)]
        recording: PathBuf,
        /// Lumbar flexion threshold in degrees for the slouch flag.
        #[arg(long, default_value_t = seatpose::analysis::DEFAULT_SLOUCH_THRESHOLD_DEG)]
        slouch_threshold: f64,
        /// Frame rendered in the figures.
        #[arg(long, default_value_t = 0)]
        frame: usize,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    let ctx = context::Context::build(
        cli.config.as_deref(),
        &cli.sets,
        cli.seed,
        cli.data_dir.as_deref(),
        cli.out_dir.as_deref(),
    )?;
    match cli.command {
        Command::Simulate => commands::simulate::run(&ctx),
        Command::Train { stage } => commands::train::run(&ctx, stage),
        Command::Eval { stages, rprecision_pool, rprecision_k } => {
            commands::eval::run(&ctx, &stages, rprecision_pool, rprecision_k)
        }
        Command::Infer { recording } => commands::infer::run(&ctx, &recording),
        Command::Sync {
            pressure,
            pressure_rate_hz,
            pose,
            pose_rate_hz,
            chair,
            subject,
            activity,
            height_m,
            mass_kg,
            out_name,
        } => commands::sync::run(
            &ctx,
            commands::sync::SyncArgs {
                pressure,
                pressure_rate_hz,
                pose,
                pose_rate_hz,
                chair,
                subject,
                activity,
                height_m,
                mass_kg,
                out_name,
            },
        ),
        Command::Report { recording, slouch_threshold, frame } => {
            commands::report::run(&ctx, &recording, slouch_threshold, frame)
        }
    }
}

/// Stable machine-readable tag for each error family, printed on the one
/// stderr line a failing run leaves behind.
fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension { .. } => "dimension",
        Error::Parse { .. } => "parse",
        Error::Range { .. } => "range",
        Error::SyncFailure { .. } => "sync_failure",
        Error::Split(_) => "split",
        Error::Undrapeable(_) => "undrapeable",
        Error::SettleFailure { .. } => "settle_failure",
        Error::TooShort { .. } => "too_short",
        Error::AlignmentDegenerate => "alignment_degenerate",
        Error::NonFinite(_) => "non_finite",
        Error::Untrained(_) => "untrained",
        Error::MissingCheckpoint { .. } => "missing_checkpoint",
        Error::EmptyTrainSet(_) => "empty_train_set",
        Error::Io { .. } => "io",
        Error::Config(_) => "config",
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error[{}]: {e}", error_kind(&e));
        std::process::exit(1);
    }
}
