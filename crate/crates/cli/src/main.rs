#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{augment, canny, gen_pairs, mask, rank, simulate, Context};
use config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "selfiegen", version, about = "Deterministic dataset stages for full-body selfie generation")]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SharedArgs {
    /// JSON pipeline config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; every random draw derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract, color and render procedural head volumes at the input distances and the ground truth distance.
    GenPairs(gen_pairs::GenPairsArgs),
    /// Warp full-body photos into per-part selfies using typical keypoints.
    SimulateSelfies(simulate::SimulateArgs),
    /// Rank reference semantic maps by clothing labels shared with the selfies.
    RankPoses(rank::RankArgs),
    /// Canny edge target from a semantic map.
    CannyTarget(canny::CannyArgs),
    /// Inpainting mask and dilated foreground mask from a semantic map.
    MakeMask(mask::MaskArgs),
    /// Fine-tune composites or zero-padded resize sets.
    Augment(augment::AugmentArgs),
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    let mut cfg = PipelineConfig::load(cli.shared.config.as_deref())?;
    if let Some(seed) = cli.shared.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.shared.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(out) = cli.shared.out {
        cfg.paths.out = Some(out);
    }
    let ctx = Context::new(cfg)?;
    match cli.command {
        Command::GenPairs(a) => gen_pairs::run(&ctx, &a),
        Command::SimulateSelfies(a) => simulate::run(&ctx, &a),
        Command::RankPoses(a) => rank::run(&ctx, &a),
        Command::CannyTarget(a) => canny::run(&ctx, &a),
        Command::MakeMask(a) => mask::run(&ctx, &a),
        Command::Augment(a) => augment::run(&ctx, &a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) if outcome.skipped > 0 => {
            log::warn!("{} item(s) skipped", outcome.skipped);
            ExitCode::from(2)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
