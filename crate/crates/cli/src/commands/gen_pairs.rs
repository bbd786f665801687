use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::Args;
use image::RgbImage;
use nalgebra::{Matrix3, Point3};
use serde::{Deserialize, Serialize};

use selfiegen::renderer::{
    project, render_distance_series, Camera, DistanceSeriesConfig, RasterOptions, SeriesFrame,
};
use selfiegen::segmap::{align_face, FaceLandmarks};
use selfiegen::volumesh::{assign_nearest_colors, marching_cubes, read_volume, write_ply};

use super::{file_stem, list_files, save_png, write_json, Context, DatasetManifest, Outcome, Skip};
use crate::config::require_path;

#[derive(Debug, Args)]
pub struct GenPairsArgs {
    /// Directory of `<id>.json` volume headers with `<id>.raw` payloads.
    #[arg(long)]
    volumes: Option<PathBuf>,
    /// Density level of the extracted surface.
    #[arg(long)]
    iso: Option<f64>,
    /// Rendered image side in pixels.
    #[arg(long)]
    resolution: Option<u32>,
}

/// Optional fields a volume header may carry besides its grid description.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct VolumeExtras {
    subject_center: Option<[f64; 3]>,
    /// World-to-camera rotation, row-major.
    rotation: Option<[[f64; 3]; 3]>,
    landmarks: Option<WorldLandmarks>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct WorldLandmarks {
    eye_left: [f64; 3],
    eye_right: [f64; 3],
    mouth: [f64; 3],
}

#[derive(Debug, Serialize)]
struct FrameEntry {
    distance: f64,
    file: String,
}

#[derive(Debug, Serialize)]
struct PairEntry {
    id: String,
    mesh: String,
    vertices: usize,
    triangles: usize,
    aligned: bool,
    inputs: Vec<FrameEntry>,
    ground_truth: FrameEntry,
}

pub fn run(ctx: &Context, args: &GenPairsArgs) -> Result<Outcome> {
    let dir = require_path(&args.volumes, &ctx.cfg.paths.volumes, "volumes")?;
    let iso = args
        .iso
        .or(ctx.cfg.render.iso)
        .ok_or_else(|| anyhow!("the surface level is required: pass --iso or set render.iso"))?;
    let resolution = args.resolution.unwrap_or(ctx.cfg.render.resolution);
    if resolution == 0 {
        bail!("--resolution must be positive");
    }
    let headers = list_files(&dir, "json")?;
    if headers.is_empty() {
        bail!("no volume headers (*.json) in {}", dir.display());
    }
    let results = ctx.par_map(&headers, |_, h| process(ctx, h, iso, resolution));

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (h, r) in headers.iter().zip(results) {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => {
                log::warn!("skipping {}: {e:#}", h.display());
                skipped.push(Skip {
                    item: file_stem(h),
                    reason: format!("{e:#}"),
                });
            }
        }
    }
    let inputs: usize = entries.iter().map(|e| e.inputs.len()).sum();
    let manifest = DatasetManifest {
        command: "gen-pairs",
        seed: ctx.cfg.seed,
        counts: BTreeMap::from([
            ("meshes", entries.len()),
            ("inputs", inputs),
            ("ground_truths", entries.len()),
            ("skipped", skipped.len()),
        ]),
        entries,
        skipped,
    };
    write_json(&ctx.out_path("manifest.json"), &manifest)?;
    log::info!("gen-pairs: {} meshes, {inputs} input images", manifest.counts["meshes"]);
    Ok(Outcome {
        skipped: manifest.skipped.len(),
    })
}

fn read_extras(header: &Path) -> Result<VolumeExtras> {
    let text = std::fs::read_to_string(header).with_context(|| format!("reading {}", header.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", header.display()))
}

fn process(ctx: &Context, header: &Path, iso: f64, resolution: u32) -> Result<PairEntry> {
    let id = file_stem(header);
    let extras = read_extras(header)?;
    let volume = read_volume(header)?;
    let mesh = marching_cubes(&volume, iso)?;
    if mesh.triangles.is_empty() {
        bail!("no surface at level {iso}");
    }
    let mesh = assign_nearest_colors(&mesh, &volume);

    let r = &ctx.cfg.render;
    let rotation = match extras.rotation {
        Some(m) => Matrix3::from_fn(|i, j| m[i][j]),
        None => Matrix3::identity(),
    };
    let center = match extras.subject_center {
        Some(c) => Point3::from(c),
        None => volume.center(),
    };
    let camera = Camera::new(rotation, r.input_distances[0], r.focal_f0, resolution, center)?;
    let series = render_distance_series(
        &mesh,
        &camera,
        &r.lighting,
        &RasterOptions {
            background: r.background,
            cull_back_faces: r.cull_back_faces,
        },
        &DistanceSeriesConfig {
            input_distances: r.input_distances.clone(),
            gt_distance: r.gt_distance,
        },
    )?;

    let finish = |frame: &SeriesFrame| -> Result<RgbImage> {
        match extras.landmarks {
            None => Ok(frame.image.rgb.clone()),
            Some(lm) => {
                let px = |p: [f64; 3]| -> Result<[f64; 2]> {
                    let q = project(&frame.camera, &Point3::from(p))?;
                    if !q.valid {
                        bail!("landmark behind the camera at d = {}", frame.distance);
                    }
                    Ok([q.x, q.y])
                };
                let landmarks = FaceLandmarks {
                    eye_left: px(lm.eye_left)?,
                    eye_right: px(lm.eye_right)?,
                    mouth: px(lm.mouth)?,
                };
                Ok(align_face(&frame.image.rgb, &landmarks, r.align_size)?.image)
            }
        }
    };
    // Everything is produced before anything is written, so a failed item
    // leaves no files behind.
    let input_images = series.inputs.iter().map(finish).collect::<Result<Vec<_>>>()?;
    let gt_image = finish(&series.ground_truth)?;

    let mesh_name = format!("{id}.ply");
    let mesh_path = ctx.out_path(&mesh_name);
    let mut w = BufWriter::new(File::create(&mesh_path).with_context(|| format!("creating {}", mesh_path.display()))?);
    write_ply(&mesh, &mut w)?;
    w.flush().with_context(|| format!("writing {}", mesh_path.display()))?;
    let mut inputs = Vec::new();
    for (frame, img) in series.inputs.iter().zip(&input_images) {
        let file = format!("{id}_d{}.png", frame.distance);
        save_png(img, &ctx.out_path(&file))?;
        inputs.push(FrameEntry {
            distance: frame.distance,
            file,
        });
    }
    let gt_file = format!("{id}_gt.png");
    save_png(&gt_image, &ctx.out_path(&gt_file))?;
    Ok(PairEntry {
        id,
        mesh: mesh_name,
        vertices: mesh.vertices.len(),
        triangles: mesh.triangles.len(),
        aligned: extras.landmarks.is_some(),
        inputs,
        ground_truth: FrameEntry {
            distance: series.ground_truth.distance,
            file: gt_file,
        },
    })
}
