use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use selfiegen::segmap::{canny_from_semantic, CannyThresholds, SemanticMap};

use super::{save_png, Context, Outcome};
use crate::config::require_path;

#[derive(Debug, Args)]
pub struct CannyArgs {
    /// Semantic map PNG (8-bit labels) with its taxonomy sidecar.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Hysteresis low threshold on gradient magnitude (default 50).
    #[arg(long)]
    low: Option<f64>,
    /// Hysteresis high threshold (default 150).
    #[arg(long)]
    high: Option<f64>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "canny.png")]
    name: String,
}

pub fn run(ctx: &Context, args: &CannyArgs) -> Result<Outcome> {
    let path = require_path(&args.map, &ctx.cfg.paths.map, "map")?;
    let map = SemanticMap::read(&path)?;
    let thresholds = CannyThresholds {
        low: args.low.unwrap_or(ctx.cfg.thresholds.canny_low),
        high: args.high.unwrap_or(ctx.cfg.thresholds.canny_high),
    };
    let edges = canny_from_semantic(&map, thresholds)?;
    save_png(&edges, &ctx.out_path(&args.name))?;
    Ok(Outcome { skipped: 0 })
}
