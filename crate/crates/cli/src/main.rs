//! `facegen`: generate, preview, validate and score synthetic face datasets.

mod commands;
mod error;
mod generate;
mod job;
mod overlay;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facegen::scene::PRESET_NAMES;

use crate::error::CliError;
use crate::job::{load_assets, resolve_job};

#[derive(Parser)]
#[command(name = "facegen", version, about = "Synthetic face-detection dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JobArgs {
    /// Named configuration (s1, s2, s3, setA, setB, setC, mafa_occ).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES), conflicts_with = "config")]
    preset: Option<String>,
    /// JSON job file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configured one.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a dataset with annotations, stats and a run manifest.
    Generate {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render one image of a run, optionally with its annotations drawn.
    Preview {
        #[command(flatten)]
        job: JobArgs,
        index: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overlay: bool,
    },
    /// Check every asset in a manifest (default: $FACEGEN_ASSETS).
    ValidateAssets { manifest: Option<PathBuf> },
    /// Score detections against ground truth (wider.txt or COCO .json).
    Evaluate {
        predictions: PathBuf,
        ground_truth: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Directory for eval_report.csv and pr_curve.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-scale-bin statistics of a COCO annotation file.
    Stats {
        coco: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { job, out, jobs } => {
            let resolved = resolve_job(job.preset.as_deref(), job.config.as_deref(), job.seed)?;
            let assets = load_assets(&resolved.assets)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            generate::run_generate(&resolved, &assets, &out, jobs)?;
            eprintln!(
                "wrote {} images to {}",
                resolved.job.generation.num_images,
                out.display()
            );
            Ok(())
        }
        Command::Preview {
            job,
            index,
            out,
            overlay,
        } => {
            let resolved = resolve_job(job.preset.as_deref(), job.config.as_deref(), job.seed)?;
            commands::preview(&resolved, index, &out, overlay)
        }
        Command::ValidateAssets { manifest } => {
            if commands::validate_assets(manifest)? {
                Ok(())
            } else {
                Err(CliError::Asset("some assets failed validation".into()))
            }
        }
        Command::Evaluate {
            predictions,
            ground_truth,
            iou,
            out,
        } => commands::run_evaluate(&predictions, &ground_truth, iou, out.as_deref()),
        Command::Stats { coco, out } => commands::run_stats(&coco, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
