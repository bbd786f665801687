//! Augmentation sets: fine-tune targets made by pasting selfies onto
//! full-body candidates, and zero-padded random-resize sets.

use std::collections::BTreeMap;

use image::{GenericImage, GenericImageView, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{resize, ResizeFilter};
use crate::segmap::{BBox, Mask};

pub const DEFAULT_POOL_SIZE: usize = 20;
pub const DEFAULT_FINETUNE_OUTPUTS: usize = 200;
pub const DEFAULT_DREAMBOOTH_OUTPUTS: usize = 50;
pub const DEFAULT_OUT_RES: u32 = 512;
pub const FACE_RES_RANGE: (u32, u32) = (350, 450);
pub const SHOES_RES_RANGE: (u32, u32) = (400, 500);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfiePart {
    Face,
    Upper,
    Lower,
    Shoes,
}

impl SelfiePart {
    pub const ALL: [SelfiePart; 4] = [SelfiePart::Face, SelfiePart::Upper, SelfiePart::Lower, SelfiePart::Shoes];

    pub fn name(self) -> &'static str {
        match self {
            SelfiePart::Face => "face",
            SelfiePart::Upper => "upper",
            SelfiePart::Lower => "lower",
            SelfiePart::Shoes => "shoes",
        }
    }
}

impl std::fmt::Display for SelfiePart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SelfiePart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelfiePart::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown part {s:?}")))
    }
}

/// One line of an augmentation manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub source_part: SelfiePart,
    pub candidate_index: Option<usize>,
    /// Pasted size as `[width, height]`.
    pub resolution: [u32; 2],
    /// Top-left of the pasted region; may be negative when clipped.
    pub offset: [i64; 2],
}

#[derive(Debug, Clone)]
pub struct CompositeSpec<'a> {
    pub background: &'a RgbImage,
    pub mask: &'a Mask,
    pub part_bbox: BBox,
    pub selfie: &'a RgbImage,
    pub part: SelfiePart,
    pub filter: ResizeFilter,
}

#[derive(Debug, Clone)]
pub struct Composite {
    pub image: RgbImage,
    pub resolution: [u32; 2],
    pub offset: [i64; 2],
}

/// Scales the selfie to the box height (aspect kept) and pastes it centered on
/// the box. Whatever falls outside the background is dropped.
pub fn compose_finetune_target(spec: &CompositeSpec<'_>) -> Result<Composite> {
    let (bw, bh) = spec.background.dimensions();
    let b = spec.part_bbox;
    if b.y1 <= b.y0 || b.x1 <= b.x0 {
        return Err(Error::invalid("part box has zero size"));
    }
    if !b.fits_in(bw, bh) {
        return Err(Error::invalid(format!("part box {b:?} exceeds {bw}x{bh} background")));
    }
    if spec.mask.dimensions() != (bw, bh) {
        return Err(Error::invalid("mask and background sizes differ"));
    }
    let (sw, sh) = spec.selfie.dimensions();
    if sw == 0 || sh == 0 {
        return Err(Error::invalid("selfie is empty"));
    }
    let h = b.height();
    let w = ((sw as f64 * h as f64 / sh as f64).round() as u32).max(1);
    let scaled = if (w, h) == (sw, sh) {
        spec.selfie.clone()
    } else {
        resize(spec.selfie, w, h, spec.filter)
    };
    let left = (b.x0 as i64 + b.x1 as i64 - w as i64).div_euclid(2);
    let top = (b.y0 as i64 + b.y1 as i64 - h as i64).div_euclid(2);
    let mut image = spec.background.clone();
    paste_clipped(&mut image, &scaled, left, top);
    Ok(Composite {
        image,
        resolution: [w, h],
        offset: [left, top],
    })
}

fn paste_clipped(dst: &mut RgbImage, src: &RgbImage, left: i64, top: i64) {
    let (dw, dh) = (dst.width() as i64, dst.height() as i64);
    let (sw, sh) = (src.width() as i64, src.height() as i64);
    let (x0, y0) = (left.max(0), top.max(0));
    let (x1, y1) = ((left + sw).min(dw), (top + sh).min(dh));
    if x0 >= x1 || y0 >= y1 {
        return;
    }
    let view = src.view((x0 - left) as u32, (y0 - top) as u32, (x1 - x0) as u32, (y1 - y0) as u32);
    dst.copy_from(&*view, x0 as u32, y0 as u32).expect("clipped to fit");
}

/// A full-body candidate with the boxes of its body parts.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub background: RgbImage,
    pub mask: Mask,
    pub part_bboxes: BTreeMap<SelfiePart, BBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentPlan {
    pub pool_size: usize,
    pub num_outputs: usize,
    pub rng_seed: u64,
}

impl Default for AugmentPlan {
    fn default() -> Self {
        Self {
            pool_size: DEFAULT_POOL_SIZE,
            num_outputs: DEFAULT_FINETUNE_OUTPUTS,
            rng_seed: 0,
        }
    }
}

impl AugmentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.num_outputs == 0 {
            return Err(Error::invalid("pool size and output count must be at least 1"));
        }
        Ok(())
    }
}

/// Independent stream for output `index`.
pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub image: RgbImage,
    pub entry: ManifestEntry,
}

fn check_pool(pool: &[Candidate], selfies: &BTreeMap<SelfiePart, RgbImage>, plan: &AugmentPlan) -> Result<usize> {
    plan.validate()?;
    if pool.is_empty() {
        return Err(Error::invalid("candidate pool is empty"));
    }
    if selfies.is_empty() {
        return Err(Error::invalid("no selfies to paste"));
    }
    Ok(pool.len().min(plan.pool_size))
}

/// Output `index` of the fine-tune set: a candidate drawn uniformly from the
/// first `pool_size` entries, then a selfie part drawn uniformly among the
/// parts that both the selfie set and that candidate provide.
pub fn finetune_sample(
    pool: &[Candidate],
    selfies: &BTreeMap<SelfiePart, RgbImage>,
    plan: &AugmentPlan,
    filter: ResizeFilter,
    index: usize,
) -> Result<Sample> {
    let n = check_pool(pool, selfies, plan)?;
    let mut rng = item_rng(plan.rng_seed, index);
    let candidate_index = rng.random_range(0..n);
    let cand = &pool[candidate_index];
    let parts: Vec<SelfiePart> = selfies
        .keys()
        .copied()
        .filter(|p| cand.part_bboxes.contains_key(p))
        .collect();
    if parts.is_empty() {
        return Err(Error::invalid(format!(
            "candidate {candidate_index} has no box for any available selfie part"
        )));
    }
    let part = parts[rng.random_range(0..parts.len())];
    let c = compose_finetune_target(&CompositeSpec {
        background: &cand.background,
        mask: &cand.mask,
        part_bbox: cand.part_bboxes[&part],
        selfie: &selfies[&part],
        part,
        filter,
    })?;
    Ok(Sample {
        image: c.image,
        entry: ManifestEntry {
            file: format!("finetune_{index:04}.png"),
            source_part: part,
            candidate_index: Some(candidate_index),
            resolution: c.resolution,
            offset: c.offset,
        },
    })
}

pub fn build_finetune_set(
    pool: &[Candidate],
    selfies: &BTreeMap<SelfiePart, RgbImage>,
    plan: &AugmentPlan,
    filter: ResizeFilter,
) -> Result<Vec<Sample>> {
    check_pool(pool, selfies, plan)?;
    (0..plan.num_outputs)
        .map(|i| finetune_sample(pool, selfies, plan, filter, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PadParams {
    pub min_res: u32,
    pub max_res: u32,
    pub out_res: u32,
    pub count: usize,
    /// Center-crop the source to a square before resizing.
    pub center_crop: bool,
    pub filter: ResizeFilter,
}

impl Default for PadParams {
    fn default() -> Self {
        Self::face()
    }
}

impl PadParams {
    pub fn face() -> Self {
        Self {
            min_res: FACE_RES_RANGE.0,
            max_res: FACE_RES_RANGE.1,
            out_res: DEFAULT_OUT_RES,
            count: DEFAULT_DREAMBOOTH_OUTPUTS,
            center_crop: true,
            filter: ResizeFilter::Bilinear,
        }
    }

    pub fn shoes() -> Self {
        Self {
            min_res: SHOES_RES_RANGE.0,
            max_res: SHOES_RES_RANGE.1,
            ..Self::face()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_res == 0 || self.min_res > self.max_res || self.max_res > self.out_res {
            return Err(Error::invalid(format!(
                "need 0 < min_res <= max_res <= out_res, got {}, {}, {}",
                self.min_res, self.max_res, self.out_res
            )));
        }
        Ok(())
    }
}

fn center_square(image: &RgbImage) -> RgbImage {
    let (w, h) = image.dimensions();
    let side = w.min(h);
    image.view((w - side) / 2, (h - side) / 2, side, side).to_image()
}

/// Output `index`: the source resized to a random square side in
/// `[min_res, max_res]`, placed at a random offset on a black canvas. The
/// offset leaves a zero border on all four sides unless the square is within
/// one pixel of the canvas size.
pub fn pad_sample(image: &RgbImage, params: &PadParams, part: SelfiePart, seed: u64, index: usize) -> Result<Sample> {
    params.validate()?;
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::invalid("source image is empty"));
    }
    let mut rng = item_rng(seed, index);
    let r = rng.random_range(params.min_res..=params.max_res);
    // At least one zero row and column on every side whenever there is room.
    let slack = params.out_res - r;
    let range = if slack >= 2 { 1..=slack - 1 } else { 0..=slack };
    let ox = rng.random_range(range.clone());
    let oy = rng.random_range(range);
    let src = if params.center_crop { center_square(image) } else { image.clone() };
    let scaled = if src.dimensions() == (r, r) { src } else { resize(&src, r, r, params.filter) };
    let mut canvas = RgbImage::new(params.out_res, params.out_res);
    canvas.copy_from(&scaled, ox, oy).expect("offset keeps the square inside");
    Ok(Sample {
        image: canvas,
        entry: ManifestEntry {
            file: format!("dreambooth_{part}_{index:04}.png"),
            source_part: part,
            candidate_index: None,
            resolution: [r, r],
            offset: [ox as i64, oy as i64],
        },
    })
}

pub fn dreambooth_pad_augment(image: &RgbImage, params: &PadParams, part: SelfiePart, seed: u64) -> Result<Vec<Sample>> {
    params.validate()?;
    (0..params.count).map(|i| pad_sample(image, params, part, seed, i)).collect()
}
