use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use image::RgbImage;
use serde::Deserialize;

use selfiegen::augment::{finetune_sample, pad_sample, AugmentPlan, Candidate, ManifestEntry, SelfiePart};
use selfiegen::segmap::{group_bbox, person_bbox, scale_bbox_to_mask, BBox, LabelGroup, Mask, SemanticMap};

use super::{file_stem, list_files, save_png, write_json, Context, DatasetManifest, Outcome, Skip};
use crate::config::require_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Finetune,
    Dreambooth,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Composite onto pool candidates, or zero-pad resized selfies.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Directory with `face.png`, `upper.png`, `lower.png`, `shoes.png` (any subset).
    #[arg(long)]
    selfies: Option<PathBuf>,
    /// Candidate pool directory of `<id>.json` descriptors (fine-tune mode).
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Number of outputs (per part in dreambooth mode).
    #[arg(long)]
    count: Option<usize>,
    /// Parts to augment in dreambooth mode.
    #[arg(long, value_delimiter = ',', default_values = ["face", "shoes"])]
    parts: Vec<String>,
    /// Keep the full selfie instead of center-cropping it to a square first.
    #[arg(long)]
    no_center_crop: bool,
}

/// Candidate descriptor. Paths are relative to the descriptor. Part boxes come
/// from `part_bboxes` or, failing that, from the label groups of `semantic_map`;
/// the mask comes from `mask` or the scaled person box of `semantic_map`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    image: PathBuf,
    #[serde(default)]
    mask: Option<PathBuf>,
    #[serde(default)]
    semantic_map: Option<PathBuf>,
    #[serde(default)]
    part_bboxes: BTreeMap<SelfiePart, BBox>,
}

fn load_candidate(ctx: &Context, descriptor: &Path) -> Result<Candidate> {
    let text = std::fs::read_to_string(descriptor).with_context(|| format!("reading {}", descriptor.display()))?;
    let d: CandidateFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", descriptor.display()))?;
    let base = descriptor.parent().unwrap_or(Path::new("."));
    let image_path = base.join(&d.image);
    let background = image::open(&image_path)
        .with_context(|| format!("reading {}", image_path.display()))?
        .into_rgb8();
    let map = d.semantic_map.as_ref().map(|p| SemanticMap::read(&base.join(p))).transpose()?;
    let mut part_bboxes = d.part_bboxes;
    if part_bboxes.is_empty() {
        if let Some(map) = &map {
            for (part, group) in [
                (SelfiePart::Face, LabelGroup::Face),
                (SelfiePart::Upper, LabelGroup::Upper),
                (SelfiePart::Lower, LabelGroup::Lower),
                (SelfiePart::Shoes, LabelGroup::Shoes),
            ] {
                if let Some(b) = group_bbox(map, &[group]) {
                    part_bboxes.insert(part, b);
                }
            }
        }
    }
    let (w, h) = background.dimensions();
    let mask = match (&d.mask, &map) {
        (Some(p), _) => Mask::read_png(&base.join(p))?,
        (None, Some(map)) => scale_bbox_to_mask(&person_bbox(map)?, ctx.cfg.thresholds.bbox_factor, map.width(), map.height())?,
        (None, None) => Mask::empty(w, h),
    };
    Ok(Candidate {
        background,
        mask,
        part_bboxes,
    })
}

fn load_selfies(dir: &Path, parts: &[SelfiePart]) -> Result<BTreeMap<SelfiePart, RgbImage>> {
    let mut out = BTreeMap::new();
    for &part in parts {
        let p = dir.join(format!("{part}.png"));
        if p.is_file() {
            let img = image::open(&p).with_context(|| format!("reading {}", p.display()))?;
            out.insert(part, img.into_rgb8());
        }
    }
    Ok(out)
}

pub fn run(ctx: &Context, args: &AugmentArgs) -> Result<Outcome> {
    let selfie_dir = require_path(&args.selfies, &ctx.cfg.paths.selfies, "selfies")?;
    let results: Vec<Result<ManifestEntry>> = match args.mode {
        Mode::Finetune => run_finetune(ctx, args, &selfie_dir)?,
        Mode::Dreambooth => run_dreambooth(ctx, args, &selfie_dir)?,
    };
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => {
                log::warn!("output {i} skipped: {e:#}");
                skipped.push(Skip {
                    item: i.to_string(),
                    reason: format!("{e:#}"),
                });
            }
        }
    }
    let mut counts = BTreeMap::from([("outputs", entries.len()), ("skipped", skipped.len())]);
    for part in SelfiePart::ALL {
        counts.insert(part.name(), entries.iter().filter(|e| e.source_part == part).count());
    }
    let manifest = DatasetManifest {
        command: match args.mode {
            Mode::Finetune => "augment-finetune",
            Mode::Dreambooth => "augment-dreambooth",
        },
        seed: ctx.cfg.seed,
        counts,
        entries,
        skipped,
    };
    write_json(&ctx.out_path("manifest.json"), &manifest)?;
    log::info!("augment: wrote {} images", manifest.entries.len());
    Ok(Outcome {
        skipped: manifest.skipped.len(),
    })
}

fn run_finetune(ctx: &Context, args: &AugmentArgs, selfie_dir: &Path) -> Result<Vec<Result<ManifestEntry>>> {
    let pool_dir = require_path(&args.pool, &ctx.cfg.paths.pool, "pool")?;
    let a = &ctx.cfg.augment;
    let descriptors = list_files(&pool_dir, "json")?;
    if descriptors.is_empty() {
        bail!("candidate pool {} has no descriptors", pool_dir.display());
    }
    let pool = ctx
        .par_map(&descriptors, |_, d| load_candidate(ctx, d).with_context(|| format!("candidate {}", file_stem(d))))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let selfies = load_selfies(selfie_dir, &SelfiePart::ALL)?;
    if selfies.is_empty() {
        bail!("no selfies found in {}", selfie_dir.display());
    }
    let plan = AugmentPlan {
        pool_size: a.pool_size,
        num_outputs: args.count.unwrap_or(a.num_outputs),
        rng_seed: ctx.cfg.seed,
    };
    plan.validate()?;
    let indices: Vec<usize> = (0..plan.num_outputs).collect();
    Ok(ctx.par_map(&indices, |_, &i| {
        let s = finetune_sample(&pool, &selfies, &plan, a.filter, i)?;
        save_png(&s.image, &ctx.out_path(&s.entry.file))?;
        Ok(s.entry)
    }))
}

fn run_dreambooth(ctx: &Context, args: &AugmentArgs, selfie_dir: &Path) -> Result<Vec<Result<ManifestEntry>>> {
    let parts = args
        .parts
        .iter()
        .map(|p| p.parse::<SelfiePart>())
        .collect::<selfiegen::Result<Vec<_>>>()?;
    let selfies = load_selfies(selfie_dir, &parts)?;
    let mut jobs = Vec::new();
    for &part in &parts {
        let Some(img) = selfies.get(&part) else {
            bail!("missing {}", selfie_dir.join(format!("{part}.png")).display());
        };
        let mut params = match part {
            SelfiePart::Shoes => ctx.cfg.augment.shoes_params(),
            _ => ctx.cfg.augment.face_params(),
        };
        if let Some(n) = args.count {
            params.count = n;
        }
        if args.no_center_crop {
            params.center_crop = false;
        }
        params.validate()?;
        let seed = ctx.cfg.seed.wrapping_add(part as u64);
        jobs.extend((0..params.count).map(|i| (img, params, part, seed, i)));
    }
    Ok(ctx.par_map(&jobs, |_, &(img, params, part, seed, i)| {
        let s = pad_sample(img, &params, part, seed, i)?;
        save_png(&s.image, &ctx.out_path(&s.entry.file))?;
        Ok(s.entry)
    }))
}
