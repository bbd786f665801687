use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use selfiegen::augment::{PadParams, DEFAULT_FINETUNE_OUTPUTS, DEFAULT_POOL_SIZE};
use selfiegen::raster::{Interpolation, ResizeFilter};
use selfiegen::renderer::{
    PhongLighting, DEFAULT_FOCAL_F0, DEFAULT_GT_DISTANCE, DEFAULT_IMAGE_SIZE, DEFAULT_INPUT_DISTANCES,
};
use selfiegen::schedule::{DEFAULT_BLEND_S, DEFAULT_TOTAL_STEPS};
use selfiegen::segmap::{DEFAULT_BBOX_FACTOR, DEFAULT_DILATE_RADIUS, REFERENCE_MIN_PIXELS, SELFIE_MIN_PIXELS};
use selfiegen::warp::{PartJoints, DEFAULT_CONFIDENCE_THRESHOLD};

/// Everything a run needs besides the subcommand flags. Missing fields take
/// their defaults; command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub paths: Paths,
    pub render: RenderConfig,
    pub thresholds: Thresholds,
    pub selfie: SelfieConfig,
    pub augment: AugmentConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out: Option<PathBuf>,
    pub volumes: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub typical: Option<PathBuf>,
    pub selfie_maps: Option<PathBuf>,
    pub collection: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub selfies: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub focal_f0: f64,
    pub input_distances: Vec<f64>,
    pub gt_distance: f64,
    pub resolution: u32,
    /// Density level of the extracted surface. No default: it depends on how
    /// the volumes were produced.
    pub iso: Option<f64>,
    pub align_size: u32,
    pub lighting: PhongLighting,
    pub background: [u8; 3],
    pub cull_back_faces: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            focal_f0: DEFAULT_FOCAL_F0,
            input_distances: DEFAULT_INPUT_DISTANCES.to_vec(),
            gt_distance: DEFAULT_GT_DISTANCE,
            resolution: DEFAULT_IMAGE_SIZE,
            iso: None,
            align_size: DEFAULT_IMAGE_SIZE,
            lighting: PhongLighting::default(),
            background: [0, 0, 0],
            cull_back_faces: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub selfie_min_pixels: usize,
    pub reference_min_pixels: usize,
    pub bbox_factor: f64,
    pub dilate_radius: u32,
    pub blend_s: f64,
    pub total_steps: u32,
    pub canny_low: f64,
    pub canny_high: f64,
    pub keypoint_confidence: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            selfie_min_pixels: SELFIE_MIN_PIXELS,
            reference_min_pixels: REFERENCE_MIN_PIXELS,
            bbox_factor: DEFAULT_BBOX_FACTOR,
            dilate_radius: DEFAULT_DILATE_RADIUS,
            blend_s: DEFAULT_BLEND_S,
            total_steps: DEFAULT_TOTAL_STEPS,
            canny_low: 50.0,
            canny_high: 150.0,
            keypoint_confidence: DEFAULT_CONFIDENCE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfieConfig {
    /// `[width, height]` of simulated body-part selfies.
    pub size: [u32; 2],
    pub face_size: u32,
    pub joints: PartJoints,
    pub interpolation: Interpolation,
}

impl Default for SelfieConfig {
    fn default() -> Self {
        Self {
            size: [512, 512],
            face_size: 512,
            joints: PartJoints::default(),
            interpolation: Interpolation::Bilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub pool_size: usize,
    pub num_outputs: usize,
    pub filter: ResizeFilter,
    pub face: PadOverrides,
    pub shoes: PadOverrides,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            pool_size: DEFAULT_POOL_SIZE,
            num_outputs: DEFAULT_FINETUNE_OUTPUTS,
            filter: ResizeFilter::Bilinear,
            face: PadOverrides::default(),
            shoes: PadOverrides::default(),
        }
    }
}

impl AugmentConfig {
    pub fn face_params(&self) -> PadParams {
        self.face.apply(PadParams { filter: self.filter, ..PadParams::face() })
    }

    pub fn shoes_params(&self) -> PadParams {
        self.shoes.apply(PadParams { filter: self.filter, ..PadParams::shoes() })
    }
}

/// Fields left out keep the per-part defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PadOverrides {
    pub min_res: Option<u32>,
    pub max_res: Option<u32>,
    pub out_res: Option<u32>,
    pub count: Option<usize>,
    pub center_crop: Option<bool>,
}

impl PadOverrides {
    fn apply(&self, base: PadParams) -> PadParams {
        PadParams {
            min_res: self.min_res.unwrap_or(base.min_res),
            max_res: self.max_res.unwrap_or(base.max_res),
            out_res: self.out_res.unwrap_or(base.out_res),
            count: self.count.unwrap_or(base.count),
            center_crop: self.center_crop.unwrap_or(base.center_crop),
            filter: base.filter,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.render;
        if !(r.focal_f0 > 0.0) || !(r.gt_distance > 0.0) || r.input_distances.iter().any(|d| !(*d > 0.0)) {
            bail!("focal f0 and all camera distances must be positive");
        }
        if r.input_distances.is_empty() {
            bail!("render.input_distances is empty");
        }
        if r.resolution == 0 || r.align_size == 0 {
            bail!("render sizes must be positive");
        }
        let t = &self.thresholds;
        if !(t.bbox_factor > 0.0) {
            bail!("bbox_factor must be positive");
        }
        if !(0.0..=1.0).contains(&t.blend_s) || t.total_steps == 0 {
            bail!("blend_s must lie in [0, 1] and total_steps must be positive");
        }
        if !(t.canny_low >= 0.0 && t.canny_high >= t.canny_low) {
            bail!("canny thresholds need 0 <= low <= high");
        }
        if !(0.0..=1.0).contains(&t.keypoint_confidence) {
            bail!("keypoint_confidence must lie in [0, 1]");
        }
        if self.selfie.size.contains(&0) || self.selfie.face_size == 0 {
            bail!("selfie sizes must be positive");
        }
        let a = &self.augment;
        if a.pool_size == 0 || a.num_outputs == 0 {
            bail!("augment pool_size and num_outputs must be at least 1");
        }
        a.face_params().validate().context("augment.face")?;
        a.shoes_params().validate().context("augment.shoes")?;
        Ok(())
    }
}

/// Resolves a path from the flag or the config, and checks that it exists.
pub fn require_path(flag: &Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    let Some(p) = flag.as_ref().or(config.as_ref()) else {
        bail!("missing --{name} (or paths.{} in the config)", name.replace('-', "_"));
    };
    if !p.exists() {
        bail!("{} does not exist", p.display());
    }
    Ok(p.clone())
}
