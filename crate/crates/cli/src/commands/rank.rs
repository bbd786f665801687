use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use serde::Serialize;

use selfiegen::segmap::{person_bbox, rank_collection, scale_bbox_to_mask, SelfieLabelSets, SemanticMap};

use super::{list_files, write_json, Context, Outcome};
use crate::config::require_path;

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Directory with the selfie semantic maps `upper.png`, `lower.png`, `shoes.png`.
    #[arg(long)]
    selfie_maps: Option<PathBuf>,
    /// Directory of reference semantic maps (`*.png`).
    #[arg(long)]
    collection: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RankedPath {
    index: usize,
    path: String,
    score: usize,
}

pub fn run(ctx: &Context, args: &RankArgs) -> Result<Outcome> {
    let selfie_dir = require_path(&args.selfie_maps, &ctx.cfg.paths.selfie_maps, "selfie-maps")?;
    let collection_dir = require_path(&args.collection, &ctx.cfg.paths.collection, "collection")?;
    let t = &ctx.cfg.thresholds;
    let read = |name: &str| -> Result<SemanticMap> {
        let p = selfie_dir.join(name);
        SemanticMap::read(&p).with_context(|| format!("reading selfie map {}", p.display()))
    };
    let selfies = SelfieLabelSets::from_maps(
        &read("upper.png")?,
        &read("lower.png")?,
        &read("shoes.png")?,
        t.selfie_min_pixels,
    );
    let paths = list_files(&collection_dir, "png")?;
    let maps = ctx
        .par_map(&paths, |_, p| {
            SemanticMap::read(p).with_context(|| format!("reading reference map {}", p.display()))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ranked = rank_collection(&selfies, &maps, t.reference_min_pixels);
    let out: Vec<RankedPath> = ranked
        .iter()
        .map(|r| RankedPath {
            index: r.index,
            path: paths[r.index].display().to_string(),
            score: r.score,
        })
        .collect();
    write_json(&ctx.out_path("ranking.json"), &out)?;

    let mut skipped = 0;
    if let Some(top) = ranked.first() {
        let map = &maps[top.index];
        match person_bbox(map) {
            Ok(b) => {
                let mask = scale_bbox_to_mask(&b, t.bbox_factor, map.width(), map.height())?;
                mask.write_png(&ctx.out_path("top_mask.png"))?;
            }
            Err(e) => {
                log::warn!("no mask for top candidate {}: {e}", paths[top.index].display());
                skipped = 1;
            }
        }
    }
    log::info!("rank-poses: ranked {} reference maps", out.len());
    Ok(Outcome { skipped })
}
