//! Semantic-map utilities: clothing label sets and pose-reference ranking,
//! person boxes and masks, dilation, Canny edge targets, face alignment.

mod align;
mod canny;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use image::{ColorType, GrayImage, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use align::{align_face, canonical_landmarks, AlignedFace, FaceLandmarks};
pub use canny::{canny_from_semantic, CannyThresholds};

pub const SELFIE_MIN_PIXELS: usize = 21;
pub const REFERENCE_MIN_PIXELS: usize = 5;
pub const DEFAULT_BBOX_FACTOR: f64 = 1.1;
pub const DEFAULT_DILATE_RADIUS: u32 = 21;

/// Coarse role of a parsing label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelGroup {
    Upper,
    Lower,
    Shoes,
    Face,
    /// Skin, hair and other body parts that are not clothing.
    Body,
    /// Background and anything not belonging to the person.
    Other,
}

impl LabelGroup {
    pub const CLOTHING: [LabelGroup; 3] = [LabelGroup::Upper, LabelGroup::Lower, LabelGroup::Shoes];
    pub const PERSON: [LabelGroup; 5] = [
        LabelGroup::Upper,
        LabelGroup::Lower,
        LabelGroup::Shoes,
        LabelGroup::Face,
        LabelGroup::Body,
    ];

    pub fn is_person(self) -> bool {
        self != LabelGroup::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub id: u8,
    pub name: String,
    pub group: LabelGroup,
}

/// Label id to name and group.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<TaxonomyEntry>", into = "Vec<TaxonomyEntry>")]
pub struct Taxonomy {
    entries: BTreeMap<u8, TaxonomyEntry>,
}

impl Taxonomy {
    pub fn new(entries: impl IntoIterator<Item = TaxonomyEntry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in entries {
            let id = e.id;
            if map.insert(id, e).is_some() {
                return Err(Error::invalid(format!("taxonomy lists label {id} twice")));
            }
        }
        Ok(Self { entries: map })
    }

    pub fn get(&self, id: u8) -> Option<&TaxonomyEntry> {
        self.entries.get(&id)
    }

    pub fn group(&self, id: u8) -> Option<LabelGroup> {
        self.entries.get(&id).map(|e| e.group)
    }

    pub fn contains(&self, id: u8) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TaxonomyEntry> {
        self.entries.values()
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::json(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }
}

impl TryFrom<Vec<TaxonomyEntry>> for Taxonomy {
    type Error = Error;

    fn try_from(v: Vec<TaxonomyEntry>) -> Result<Self> {
        Taxonomy::new(v)
    }
}

impl From<Taxonomy> for Vec<TaxonomyEntry> {
    fn from(t: Taxonomy) -> Self {
        t.entries.into_values().collect()
    }
}

/// Per-pixel parsing labels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    taxonomy: Taxonomy,
}

impl SemanticMap {
    pub fn new(width: u32, height: u32, labels: Vec<u8>, taxonomy: Taxonomy) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("semantic map must be non-empty"));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        let mut seen = [false; 256];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(l) = (0..256).find(|&l| seen[l] && !taxonomy.contains(l as u8)) {
            return Err(Error::invalid(format!("label {l} is missing from the taxonomy")));
        }
        Ok(Self {
            width,
            height,
            labels,
            taxonomy,
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        taxonomy: Taxonomy,
        mut f: impl FnMut(u32, u32) -> u8,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels, taxonomy)
    }

    pub fn from_image(image: &GrayImage, taxonomy: Taxonomy) -> Result<Self> {
        Self::new(image.width(), image.height(), image.as_raw().clone(), taxonomy)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn label(&self, x: u32, y: u32) -> u8 {
        self.labels[(y * self.width + x) as usize]
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width, self.height, self.labels.clone()).expect("sized at construction")
    }

    /// Pixel count per label.
    pub fn histogram(&self) -> [usize; 256] {
        let mut h = [0usize; 256];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }

    /// Mask of pixels whose label belongs to one of `groups`.
    pub fn group_mask(&self, groups: &[LabelGroup]) -> Mask {
        let mut member = [false; 256];
        for e in self.taxonomy.iter() {
            member[e.id as usize] = groups.contains(&e.group);
        }
        Mask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| member[l as usize]).collect(),
        }
    }

    /// Fine foreground mask: every pixel not in the `other` group.
    pub fn person_mask(&self) -> Mask {
        self.group_mask(&LabelGroup::PERSON)
    }

    /// Reads an 8-bit label PNG. The taxonomy comes from `<stem>.json` beside
    /// it, or `taxonomy.json` in the same directory.
    pub fn read(path: &Path) -> Result<Self> {
        let sidecar = path.with_extension("json");
        let shared = path.with_file_name("taxonomy.json");
        let tax_path = if sidecar.is_file() { sidecar } else { shared };
        Self::read_with_taxonomy(path, &tax_path)
    }

    pub fn read_with_taxonomy(path: &Path, taxonomy: &Path) -> Result<Self> {
        let taxonomy = Taxonomy::read_json(taxonomy)?;
        let img = image::open(path).map_err(|e| Error::image(path, e))?;
        if img.color() != ColorType::L8 {
            return Err(Error::invalid(format!(
                "{}: label maps must be 8-bit grayscale, got {:?}",
                path.display(),
                img.color()
            )));
        }
        Self::from_image(&img.into_luma8(), taxonomy)
    }

    /// Writes the label PNG and its `<stem>.json` taxonomy sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_image().save(path).map_err(|e| Error::image(path, e))?;
        self.taxonomy.write_json(&path.with_extension("json"))
    }
}

/// Axis-aligned pixel box, half-open: covers `x0..x1` by `y0..y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::invalid(format!("empty box ({x0}, {y0}, {x1}, {y1})")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.x1 <= width && self.y1 <= height
    }
}

/// Binary mask, row-major. `true` marks the region to inpaint or the foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "{} mask bits for {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn from_bbox(bbox: &BBox, width: u32, height: u32) -> Self {
        Self::from_fn(width, height, |x, y| bbox.contains(x, y))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.dimensions() == other.dimensions()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Tight box around the set bits.
    pub fn bbox(&self) -> Option<BBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != u32::MAX).then_some(BBox { x0, y0, x1, y1 })
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_raw(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("sized at construction")
    }

    /// Any nonzero channel value counts as set.
    pub fn from_image(image: &GrayImage) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            bits: image.pixels().map(|&Luma([v])| v != 0).collect(),
        }
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::image(path, e))?;
        Ok(Self::from_image(&img.into_luma8()))
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        self.to_image().save(path).map_err(|e| Error::image(path, e))
    }
}

pub type LabelSet = BTreeSet<u8>;

/// Labels covering at least `min_pixels` pixels whose group is in `groups`.
pub fn extract_label_set(map: &SemanticMap, min_pixels: usize, groups: &[LabelGroup]) -> LabelSet {
    let hist = map.histogram();
    map.taxonomy()
        .iter()
        .filter(|e| groups.contains(&e.group) && hist[e.id as usize] >= min_pixels)
        .map(|e| e.id)
        .collect()
}

/// `|p_r ∩ (p_u ∪ p_l ∪ p_s)|`
pub fn match_score(p_r: &LabelSet, p_u: &LabelSet, p_l: &LabelSet, p_s: &LabelSet) -> usize {
    p_r.iter()
        .filter(|l| p_u.contains(l) || p_l.contains(l) || p_s.contains(l))
        .count()
}

/// Clothing label sets of the upper-body, lower-body and shoe selfies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfieLabelSets {
    pub upper: LabelSet,
    pub lower: LabelSet,
    pub shoes: LabelSet,
}

impl SelfieLabelSets {
    /// Each selfie contributes only labels of its own group.
    pub fn from_maps(
        upper: &SemanticMap,
        lower: &SemanticMap,
        shoes: &SemanticMap,
        min_pixels: usize,
    ) -> Self {
        Self {
            upper: extract_label_set(upper, min_pixels, &[LabelGroup::Upper]),
            lower: extract_label_set(lower, min_pixels, &[LabelGroup::Lower]),
            shoes: extract_label_set(shoes, min_pixels, &[LabelGroup::Shoes]),
        }
    }

    pub fn score(&self, p_r: &LabelSet) -> usize {
        match_score(p_r, &self.upper, &self.lower, &self.shoes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub index: usize,
    pub score: usize,
}

/// Scores every map and sorts by descending score, ties in collection order.
pub fn rank_collection(
    selfies: &SelfieLabelSets,
    collection: &[SemanticMap],
    reference_min_pixels: usize,
) -> Vec<RankedCandidate> {
    let mut ranked: Vec<_> = collection
        .iter()
        .enumerate()
        .map(|(index, map)| RankedCandidate {
            index,
            score: selfies.score(&extract_label_set(map, reference_min_pixels, &LabelGroup::CLOTHING)),
        })
        .collect();
    ranked.sort_by_key(|c| std::cmp::Reverse(c.score));
    ranked
}

/// Tight box over all pixels of the given groups.
pub fn group_bbox(map: &SemanticMap, groups: &[LabelGroup]) -> Option<BBox> {
    map.group_mask(groups).bbox()
}

pub fn person_bbox(map: &SemanticMap) -> Result<BBox> {
    group_bbox(map, &LabelGroup::PERSON)
        .ok_or_else(|| Error::NotFound("semantic map has no person pixels".into()))
}

/// Scales `bbox` about its center and clamps it to the image. `None` when
/// nothing of the scaled box lies inside the image.
pub fn scale_bbox(bbox: &BBox, factor: f64, width: u32, height: u32) -> Result<Option<BBox>> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid(format!("bbox factor must be positive, got {factor}")));
    }
    let scale = |a: u32, b: u32, limit: u32| {
        let c = (a as f64 + b as f64) / 2.0;
        let half = (b as f64 - a as f64) / 2.0 * factor;
        let lo = (c - half).round().clamp(0.0, limit as f64) as u32;
        let hi = (c + half).round().clamp(0.0, limit as f64) as u32;
        (lo, hi)
    };
    let (x0, x1) = scale(bbox.x0, bbox.x1, width);
    let (y0, y1) = scale(bbox.y0, bbox.y1, height);
    Ok((x0 < x1 && y0 < y1).then_some(BBox { x0, y0, x1, y1 }))
}

/// Inpainting mask: the scaled, clamped box rasterized as a filled region.
pub fn scale_bbox_to_mask(bbox: &BBox, factor: f64, width: u32, height: u32) -> Result<Mask> {
    Ok(match scale_bbox(bbox, factor, width, height)? {
        Some(b) => Mask::from_bbox(&b, width, height),
        None => Mask::empty(width, height),
    })
}

/// Binary dilation by a `(2r+1)²` square, done as two running-window passes.
pub fn dilate(mask: &Mask, radius: u32) -> Mask {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let r = radius as usize;
    let pass = |src: &[bool], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut out = vec![false; src.len()];
        let mut prefix = vec![0u32; len + 1];
        for line in 0..lines {
            let base = line * line_stride;
            for i in 0..len {
                prefix[i + 1] = prefix[i] + src[base + i * stride] as u32;
            }
            for i in 0..len {
                let lo = i.saturating_sub(r);
                let hi = (i + r + 1).min(len);
                out[base + i * stride] = prefix[hi] > prefix[lo];
            }
        }
        out
    };
    let rows = pass(&mask.bits, w, 1, h, w);
    let bits = pass(&rows, h, w, w, 1);
    Mask {
        width: mask.width,
        height: mask.height,
        bits,
    }
}

/// Path of a taxonomy sidecar for a label PNG.
pub fn taxonomy_sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}
