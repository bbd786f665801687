use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;

use selfiegen::schedule::downsample_mask_to_latent;
use selfiegen::segmap::{dilate, person_bbox, scale_bbox_to_mask, SemanticMap};

use super::{Context, Outcome};
use crate::config::require_path;

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Semantic map PNG (8-bit labels) with its taxonomy sidecar.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Person bounding-box scale about its center (default 1.1).
    #[arg(long)]
    factor: Option<f64>,
    /// Foreground dilation radius in pixels (default 21).
    #[arg(long)]
    dilate: Option<u32>,
    /// Also write the dilated foreground pooled to a `WIDTH HEIGHT` latent grid.
    #[arg(long, num_args = 2, value_names = ["WIDTH", "HEIGHT"])]
    latent_size: Option<Vec<u32>>,
}

pub fn run(ctx: &Context, args: &MaskArgs) -> Result<Outcome> {
    let path = require_path(&args.map, &ctx.cfg.paths.map, "map")?;
    let map = SemanticMap::read(&path)?;
    let t = &ctx.cfg.thresholds;
    let factor = args.factor.unwrap_or(t.bbox_factor);
    if !(factor > 0.0) {
        bail!("--factor must be positive");
    }
    let bbox = person_bbox(&map)?;
    let inpaint = scale_bbox_to_mask(&bbox, factor, map.width(), map.height())?;
    inpaint.write_png(&ctx.out_path("mask.png"))?;
    let fg = dilate(&map.person_mask(), args.dilate.unwrap_or(t.dilate_radius));
    fg.write_png(&ctx.out_path("foreground_dilated.png"))?;
    if let Some(size) = &args.latent_size {
        let latent = downsample_mask_to_latent(&fg, size[0], size[1])?;
        latent.write_png(&ctx.out_path("foreground_latent.png"))?;
    }
    Ok(Outcome { skipped: 0 })
}
