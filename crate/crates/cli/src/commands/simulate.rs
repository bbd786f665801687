use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use image::RgbImage;
use serde::Serialize;

use selfiegen::segmap::{align_face, FaceLandmarks};
use selfiegen::warp::{typical_keypoints, BodyPart, KeypointSet, SelfieSimulator};

use super::{file_stem, list_files, save_png, write_json, Context, DatasetManifest, Outcome, Skip};
use crate::config::require_path;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory of full-body `<id>.png` photos with `<id>.json` keypoints.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Directory holding `upper`, `lower` and `shoes` typical keypoints, each
    /// either a `<part>.json` file or a `<part>/` directory of examples to average.
    #[arg(long)]
    typical: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SelfieEntry {
    id: String,
    files: BTreeMap<String, String>,
}

fn load_typical(dir: &Path, part: BodyPart, threshold: f64) -> Result<KeypointSet> {
    let file = dir.join(format!("{part}.json"));
    if file.is_file() {
        return Ok(KeypointSet::read_json(&file)?);
    }
    let sub = dir.join(part.name());
    if sub.is_dir() {
        let examples = list_files(&sub, "json")?
            .iter()
            .map(|p| KeypointSet::read_json(p))
            .collect::<selfiegen::Result<Vec<_>>>()?;
        return typical_keypoints(&examples, threshold)
            .with_context(|| format!("averaging {}", sub.display()));
    }
    bail!("no typical keypoints for {part}: expected {} or {}/", file.display(), sub.display())
}

/// Eye and mouth centers from body keypoints. The subject's right eye shows on
/// the image left.
fn face_landmarks(kp: &KeypointSet, threshold: f64) -> Result<FaceLandmarks> {
    let at = |name: &str| kp.confident(name, threshold).map(|k| [k.x, k.y]);
    let eye_left = at("REye").context("REye missing or below the confidence threshold")?;
    let eye_right = at("LEye").context("LEye missing or below the confidence threshold")?;
    let mouth = match (at("Mouth"), at("MouthLeft"), at("MouthRight")) {
        (Some(m), _, _) => m,
        (None, Some(a), Some(b)) => [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
        _ => bail!("no confident mouth keypoint (Mouth, or MouthLeft and MouthRight)"),
    };
    Ok(FaceLandmarks {
        eye_left,
        eye_right,
        mouth,
    })
}

pub fn run(ctx: &Context, args: &SimulateArgs) -> Result<Outcome> {
    let images_dir = require_path(&args.images, &ctx.cfg.paths.images, "images")?;
    let typical_dir = require_path(&args.typical, &ctx.cfg.paths.typical, "typical")?;
    let thr = ctx.cfg.thresholds.keypoint_confidence;
    let typical: BTreeMap<BodyPart, KeypointSet> = BodyPart::ALL
        .into_iter()
        .map(|p| Ok((p, load_typical(&typical_dir, p, thr)?)))
        .collect::<Result<_>>()?;
    let simulator = SelfieSimulator {
        joints: ctx.cfg.selfie.joints.clone(),
        confidence_threshold: thr,
        interpolation: ctx.cfg.selfie.interpolation,
    };
    let images = list_files(&images_dir, "png")?;
    let results = ctx.par_map(&images, |_, path| process(ctx, path, &simulator, &typical));

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (path, r) in images.iter().zip(results) {
        match r {
            Ok((entry, skips)) => {
                entries.push(entry);
                skipped.extend(skips);
            }
            Err(e) => skipped.push(Skip {
                item: file_stem(path),
                reason: format!("{e:#}"),
            }),
        }
    }
    for s in &skipped {
        log::warn!("skipped {}: {}", s.item, s.reason);
    }
    let mut counts = BTreeMap::from([("images", entries.len()), ("skipped", skipped.len())]);
    for part in ["face", "upper", "lower", "shoes"] {
        counts.insert(part, entries.iter().filter(|e| e.files.contains_key(part)).count());
    }
    let manifest = DatasetManifest {
        command: "simulate-selfies",
        seed: ctx.cfg.seed,
        counts,
        entries,
        skipped,
    };
    write_json(&ctx.out_path("manifest.json"), &manifest)?;
    Ok(Outcome {
        skipped: manifest.skipped.len(),
    })
}

fn process(
    ctx: &Context,
    path: &Path,
    simulator: &SelfieSimulator,
    typical: &BTreeMap<BodyPart, KeypointSet>,
) -> Result<(SelfieEntry, Vec<Skip>)> {
    let id = file_stem(path);
    let img: RgbImage = image::open(path)
        .with_context(|| format!("reading {}", path.display()))?
        .into_rgb8();
    let kp = KeypointSet::read_json(&path.with_extension("json"))?;
    if kp.image_size() != [img.width(), img.height()] {
        bail!(
            "keypoints were detected on a {:?} image but the photo is {}x{}",
            kp.image_size(),
            img.width(),
            img.height()
        );
    }
    let thr = simulator.confidence_threshold;
    let [w, h] = ctx.cfg.selfie.size;
    let mut outputs: Vec<(String, RgbImage)> = Vec::new();
    let mut skips = Vec::new();
    match face_landmarks(&kp, thr).and_then(|lm| Ok(align_face(&img, &lm, ctx.cfg.selfie.face_size)?)) {
        Ok(face) => outputs.push(("face".into(), face.image)),
        Err(e) => skips.push(Skip {
            item: format!("{id}/face"),
            reason: format!("{e:#}"),
        }),
    }
    for part in BodyPart::ALL {
        match simulator.simulate(&img, &kp, &typical[&part], part, (w, h)) {
            Ok(s) => outputs.push((part.name().into(), s.image)),
            Err(e) => skips.push(Skip {
                item: format!("{id}/{part}"),
                reason: e.to_string(),
            }),
        }
    }
    let mut files = BTreeMap::new();
    for (part, image) in outputs {
        let file = format!("{id}_{part}.png");
        save_png(&image, &ctx.out_path(&file))?;
        files.insert(part, file);
    }
    Ok((SelfieEntry { id, files }, skips))
}
