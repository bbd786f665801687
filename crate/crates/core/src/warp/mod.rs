//! Homography estimation and warping, and keypoint-anchored selfie simulation:
//! a full-body image is warped so its detected joints land on the typical
//! joint positions observed in real close-up selfies of one body part.

mod homography;
mod keypoints;

use image::Pixel;
use nalgebra::{Matrix3, Point2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{sample, Image8, Interpolation};

pub use homography::{estimate_homography, Homography};
pub use keypoints::{
    typical_keypoints, Keypoint, KeypointSet, BODY_25, DEFAULT_CONFIDENCE_THRESHOLD,
};

/// Inverse-maps every output pixel through `h⁻¹` and samples the input there.
/// Samples that fall outside the input take `fill`.
pub fn warp_image<P>(
    image: &Image8<P>,
    h: &Homography,
    out_size: (u32, u32),
    interpolation: Interpolation,
    fill: P,
) -> Result<Image8<P>>
where
    P: Pixel<Subpixel = u8>,
{
    let inv = h.inverse()?;
    // Scale so the bottom-right entry is 1 where possible; keeps integer maps exact.
    let m = inv.matrix();
    let m = if m[(2, 2)] != 0.0 { m / m[(2, 2)] } else { *m };
    let mut out = Image8::<P>::from_pixel(out_size.0, out_size.1, fill);
    for y in 0..out_size.1 {
        for x in 0..out_size.0 {
            let (xf, yf) = (x as f64, y as f64);
            let w = m[(2, 0)] * xf + m[(2, 1)] * yf + m[(2, 2)];
            if w == 0.0 {
                continue;
            }
            let sx = (m[(0, 0)] * xf + m[(0, 1)] * yf + m[(0, 2)]) / w;
            let sy = (m[(1, 0)] * xf + m[(1, 1)] * yf + m[(1, 2)]) / w;
            if let Some(p) = sample(image, sx, sy, interpolation) {
                out.put_pixel(x, y, p);
            }
        }
    }
    Ok(out)
}

/// Body part a simulated close-up selfie shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyPart {
    Upper,
    Lower,
    Shoes,
}

impl BodyPart {
    pub const ALL: [BodyPart; 3] = [BodyPart::Upper, BodyPart::Lower, BodyPart::Shoes];

    pub fn name(self) -> &'static str {
        match self {
            BodyPart::Upper => "upper",
            BodyPart::Lower => "lower",
            BodyPart::Shoes => "shoes",
        }
    }
}

impl std::fmt::Display for BodyPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which joints anchor the homography for each part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartJoints {
    pub upper: Vec<String>,
    pub lower: Vec<String>,
    pub shoes: Vec<String>,
}

impl Default for PartJoints {
    fn default() -> Self {
        let v = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        Self {
            upper: v(&["Neck", "RShoulder", "LShoulder", "RElbow", "LElbow", "RHip", "LHip", "MidHip"]),
            lower: v(&["RHip", "LHip", "MidHip", "RKnee", "LKnee", "RAnkle", "LAnkle"]),
            shoes: v(&["RAnkle", "LAnkle", "LBigToe", "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel"]),
        }
    }
}

impl PartJoints {
    pub fn for_part(&self, part: BodyPart) -> &[String] {
        match part {
            BodyPart::Upper => &self.upper,
            BodyPart::Lower => &self.lower,
            BodyPart::Shoes => &self.shoes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfieSimulator {
    pub joints: PartJoints,
    pub confidence_threshold: f64,
    pub interpolation: Interpolation,
}

impl Default for SelfieSimulator {
    fn default() -> Self {
        Self {
            joints: PartJoints::default(),
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            interpolation: Interpolation::Bilinear,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedSelfie<P: Pixel<Subpixel = u8>> {
    pub image: Image8<P>,
    /// Maps full-body pixel coordinates to output pixel coordinates.
    pub homography: Homography,
    /// Joint names that anchored the homography.
    pub joints: Vec<String>,
}

impl SelfieSimulator {
    /// Joint correspondences (detected, typical) usable for `part`.
    /// Joints below the confidence threshold on either side are never read.
    pub fn correspondences(
        &self,
        detected: &KeypointSet,
        typical: &KeypointSet,
        part: BodyPart,
    ) -> Vec<(String, Point2<f64>, Point2<f64>)> {
        let thr = self.confidence_threshold;
        self.joints
            .for_part(part)
            .iter()
            .filter_map(|name| {
                let d = detected.confident(name, thr)?;
                let t = typical.confident(name, thr)?;
                Some((name.clone(), Point2::new(d.x, d.y), Point2::new(t.x, t.y)))
            })
            .collect()
    }

    /// Warps `fullbody` so the part's detected joints land on their typical
    /// positions. Typical positions live in a canvas of `typical.image_size()`,
    /// which is then rescaled to `out_size` in the same resampling pass.
    pub fn simulate<P>(
        &self,
        fullbody: &Image8<P>,
        detected: &KeypointSet,
        typical: &KeypointSet,
        part: BodyPart,
        out_size: (u32, u32),
    ) -> Result<SimulatedSelfie<P>>
    where
        P: Pixel<Subpixel = u8>,
    {
        let pairs = self.correspondences(detected, typical, part);
        if pairs.len() < 4 {
            return Err(Error::SimulationFailure(format!(
                "{part}: only {} usable keypoints shared with the typical set (need 4)",
                pairs.len()
            )));
        }
        let src: Vec<_> = pairs.iter().map(|p| p.1).collect();
        let dst: Vec<_> = pairs.iter().map(|p| p.2).collect();
        let to_canvas = estimate_homography(&src, &dst)
            .map_err(|e| Error::SimulationFailure(format!("{part}: {e}")))?;

        let [cw, ch] = typical.image_size();
        let sx = out_size.0 as f64 / cw as f64;
        let sy = out_size.1 as f64 / ch as f64;
        // Pixel-center aligned rescale: u = (x + 0.5)·sx − 0.5.
        let rescale = Homography::from_matrix(Matrix3::new(
            sx,
            0.0,
            0.5 * sx - 0.5,
            0.0,
            sy,
            0.5 * sy - 0.5,
            0.0,
            0.0,
            1.0,
        ))?;
        let homography = rescale.compose(&to_canvas)?;
        let fill = *P::from_slice(&[0u8; 4][..P::CHANNEL_COUNT as usize]);
        let image = warp_image(fullbody, &homography, out_size, self.interpolation, fill)?;
        Ok(SimulatedSelfie {
            image,
            homography,
            joints: pairs.into_iter().map(|p| p.0).collect(),
        })
    }
}

/// [`SelfieSimulator::simulate`] with default joints and threshold.
pub fn simulate_selfie<P>(
    fullbody: &Image8<P>,
    detected: &KeypointSet,
    typical: &KeypointSet,
    part: BodyPart,
    out_size: (u32, u32),
) -> Result<SimulatedSelfie<P>>
where
    P: Pixel<Subpixel = u8>,
{
    SelfieSimulator::default().simulate(fullbody, detected, typical, part, out_size)
}
