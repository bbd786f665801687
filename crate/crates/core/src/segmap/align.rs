use image::Pixel;
use nalgebra::{Matrix3, Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Image8, Interpolation};
use crate::warp::{warp_image, Homography};

/// Eye centers (image-left and image-right) and the mouth center, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceLandmarks {
    pub eye_left: [f64; 2],
    pub eye_right: [f64; 2],
    pub mouth: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct AlignedFace<P: Pixel<Subpixel = u8>> {
    pub image: Image8<P>,
    /// Maps input pixel coordinates to output pixel coordinates.
    pub transform: Homography,
}

/// Landmark positions the alignment maps onto, for a square output of side `out_size`.
pub fn canonical_landmarks(out_size: u32) -> FaceLandmarks {
    let s = out_size as f64;
    let c = s / 2.0 - 0.5;
    let e2m = s * 100.0 / 512.0;
    let eye_y = c - 0.1 * e2m;
    FaceLandmarks {
        eye_left: [c - s / 8.0, eye_y],
        eye_right: [c + s / 8.0, eye_y],
        mouth: [c, eye_y + e2m],
    }
}

/// Output-to-input map of the oriented crop square.
fn crop_transform(lm: &FaceLandmarks, out_size: u32) -> Result<Matrix3<f64>> {
    let p = |a: [f64; 2]| Vector2::new(a[0], a[1]);
    let (el, er, m) = (p(lm.eye_left), p(lm.eye_right), p(lm.mouth));
    if !(el.iter().chain(er.iter()).chain(m.iter()).all(|v| v.is_finite())) {
        return Err(Error::invalid("face landmarks must be finite"));
    }
    let eye_avg = (el + er) * 0.5;
    let e2e = er - el;
    let e2m = m - eye_avg;
    let scale = e2e.norm().max(e2m.norm()).max(1.0);
    if e2e.norm() <= 1e-9 * scale {
        return Err(Error::degenerate("eye landmarks coincide"));
    }
    if e2e.perp(&e2m).abs() <= 1e-9 * scale * scale {
        return Err(Error::degenerate("mouth lies on the eye axis"));
    }
    let mut x = e2e - Vector2::new(-e2m.y, e2m.x);
    if x.norm() <= 1e-9 * scale {
        return Err(Error::degenerate("crop orientation is undefined"));
    }
    x /= x.norm();
    x *= (2.0 * e2e.norm()).max(1.8 * e2m.norm());
    let y = Vector2::new(-x.y, x.x);
    let c = eye_avg + e2m * 0.1;
    let origin = c - x - y;
    let s = out_size as f64;
    // src = origin + ((u + 0.5)/s)·2x + ((v + 0.5)/s)·2y
    let ax = x * (2.0 / s);
    let ay = y * (2.0 / s);
    let t = origin + (ax + ay) * 0.5;
    Ok(Matrix3::new(ax.x, ay.x, t.x, ax.y, ay.y, t.y, 0.0, 0.0, 1.0))
}

/// Oriented square face crop resampled to `out_size`², placing the eyes and
/// mouth at [`canonical_landmarks`]. Area outside the input is black.
pub fn align_face<P>(image: &Image8<P>, landmarks: &FaceLandmarks, out_size: u32) -> Result<AlignedFace<P>>
where
    P: Pixel<Subpixel = u8>,
{
    if out_size == 0 {
        return Err(Error::invalid("output size must be positive"));
    }
    let to_source = Homography::from_matrix(crop_transform(landmarks, out_size)?)?;
    let transform = to_source.inverse()?;
    let fill = *P::from_slice(&[0u8; 4][..P::CHANNEL_COUNT as usize]);
    let image = warp_image(image, &transform, (out_size, out_size), Interpolation::Bilinear, fill)?;
    Ok(AlignedFace { image, transform })
}

impl FaceLandmarks {
    pub fn map(&self, h: &Homography) -> Option<FaceLandmarks> {
        let f = |a: [f64; 2]| h.apply(&Point2::new(a[0], a[1])).map(|p| [p.x, p.y]);
        Some(FaceLandmarks {
            eye_left: f(self.eye_left)?,
            eye_right: f(self.eye_right)?,
            mouth: f(self.mouth)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::psnr;
    use image::{Rgb, RgbImage};

    fn face_like(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let (fx, fy) = (x as f64, y as f64);
            Rgb([
                (128.0 + 100.0 * (fx / 19.0).sin() * (fy / 23.0).cos()) as u8,
                (128.0 + 90.0 * ((fx + 2.0 * fy) / 41.0).sin()) as u8,
                (128.0 + 70.0 * ((fx - fy) / 29.0).cos()) as u8,
            ])
        })
    }

    #[test]
    fn canonical_values() {
        let c = canonical_landmarks(512);
        assert_eq!(c.eye_left, [191.5, 245.5]);
        assert_eq!(c.eye_right, [319.5, 245.5]);
        assert_eq!(c.mouth, [255.5, 345.5]);
    }

    #[test]
    fn canonical_input_is_identity() {
        let img = face_like(512, 512);
        let out = align_face(&img, &canonical_landmarks(512), 512).unwrap();
        let p = psnr(img.as_raw(), out.image.as_raw());
        assert!(p > 40.0, "psnr {p}");
        let id = Homography::identity();
        for (a, b) in out.transform.to_row_major().iter().zip(id.to_row_major()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_landmarks_land_on_canonical() {
        let canon = canonical_landmarks(256);
        let theta = 15f64.to_radians();
        let (s, c) = theta.sin_cos();
        let center = [300.0, 280.0];
        let rot = |p: [f64; 2]| {
            let (dx, dy) = (p[0] * 1.7 - 128.0, p[1] * 1.7 - 128.0);
            [center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
        };
        let lm = FaceLandmarks {
            eye_left: rot(canon.eye_left),
            eye_right: rot(canon.eye_right),
            mouth: rot(canon.mouth),
        };
        let img = face_like(600, 560);
        let out = align_face(&img, &lm, 256).unwrap();
        let mapped = lm.map(&out.transform).unwrap();
        for (a, b) in [
            (mapped.eye_left, canon.eye_left),
            (mapped.eye_right, canon.eye_right),
            (mapped.mouth, canon.mouth),
        ] {
            assert!((a[0] - b[0]).hypot(a[1] - b[1]) < 1.0, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn degenerate_landmarks() {
        let img = face_like(64, 64);
        let same = FaceLandmarks { eye_left: [20.0, 20.0], eye_right: [20.0, 20.0], mouth: [20.0, 40.0] };
        assert!(matches!(align_face(&img, &same, 64), Err(Error::Degenerate(_))));
        let collinear = FaceLandmarks { eye_left: [10.0, 20.0], eye_right: [30.0, 20.0], mouth: [50.0, 20.0] };
        assert!(matches!(align_face(&img, &collinear, 64), Err(Error::Degenerate(_))));
    }
}
