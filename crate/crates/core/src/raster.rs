//! Resampling helpers shared by the warping, alignment and augmentation stages.
//!
//! All continuous coordinates here are *index* coordinates: the center of
//! pixel `(i, j)` sits at `(i as f64, j as f64)`.

use image::{ImageBuffer, Pixel};
use serde::{Deserialize, Serialize};

/// 8-bit image of any channel layout.
pub type Image8<P> = ImageBuffer<P, Vec<u8>>;

/// How a continuous sample position is turned into a pixel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Required for label images, which must never be blended.
    Nearest,
    #[default]
    Bilinear,
}

/// Filter used by [`resize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeFilter {
    #[default]
    Bilinear,
    /// Box average over each destination pixel's footprint; better for large downscales.
    Area,
}

const SNAP_EPS: f64 = 1e-9;

/// Pulls coordinates that are within rounding noise of an integer onto it, so
/// that exact-integer mappings survive a round trip through a normalized matrix.
#[inline]
pub(crate) fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP_EPS {
        r
    } else {
        v
    }
}

/// Samples `img` at a continuous position, or `None` when it falls outside.
pub fn sample<P>(img: &Image8<P>, x: f64, y: f64, interp: Interpolation) -> Option<P>
where
    P: Pixel<Subpixel = u8>,
{
    match interp {
        Interpolation::Nearest => sample_nearest(img, x, y),
        Interpolation::Bilinear => sample_bilinear(img, x, y),
    }
}

pub fn sample_nearest<P>(img: &Image8<P>, x: f64, y: f64) -> Option<P>
where
    P: Pixel<Subpixel = u8>,
{
    let (w, h) = img.dimensions();
    let (x, y) = (snap(x), snap(y));
    if !(x.is_finite() && y.is_finite()) {
        return None;
    }
    // Half-way points round down so that a pixel owns [i - 0.5, i + 0.5).
    let xi = (x + 0.5).floor();
    let yi = (y + 0.5).floor();
    if xi < 0.0 || yi < 0.0 || xi >= w as f64 || yi >= h as f64 {
        return None;
    }
    Some(*img.get_pixel(xi as u32, yi as u32))
}

pub fn sample_bilinear<P>(img: &Image8<P>, x: f64, y: f64) -> Option<P>
where
    P: Pixel<Subpixel = u8>,
{
    let (w, h) = img.dimensions();
    let (x, y) = (snap(x), snap(y));
    if !(x.is_finite() && y.is_finite()) || w == 0 || h == 0 {
        return None;
    }
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return None;
    }
    let x0 = (x.floor() as u32).min(w - 1);
    let y0 = (y.floor() as u32).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    if fx == 0.0 && fy == 0.0 {
        return Some(*img.get_pixel(x0, y0));
    }

    let p00 = img.get_pixel(x0, y0).channels();
    let p10 = img.get_pixel(x1, y0).channels();
    let p01 = img.get_pixel(x0, y1).channels();
    let p11 = img.get_pixel(x1, y1).channels();
    let mut out = [0u8; 4];
    let n = P::CHANNEL_COUNT as usize;
    for c in 0..n {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        let v = top * (1.0 - fy) + bottom * fy;
        out[c] = v.round().clamp(0.0, 255.0) as u8;
    }
    Some(*P::from_slice(&out[..n]))
}

/// Resizes to exactly `width × height` with pixel-center alignment.
pub fn resize<P>(img: &Image8<P>, width: u32, height: u32, filter: ResizeFilter) -> Image8<P>
where
    P: Pixel<Subpixel = u8>,
{
    let (sw, sh) = img.dimensions();
    if (sw, sh) == (width, height) {
        return img.clone();
    }
    let mut out = ImageBuffer::new(width, height);
    if sw == 0 || sh == 0 || width == 0 || height == 0 {
        return out;
    }
    match filter {
        ResizeFilter::Area if sw >= width && sh >= height => resize_area(img, &mut out),
        _ => resize_bilinear(img, &mut out),
    }
    out
}

fn resize_bilinear<P>(img: &Image8<P>, out: &mut Image8<P>)
where
    P: Pixel<Subpixel = u8>,
{
    let (sw, sh) = img.dimensions();
    let (dw, dh) = out.dimensions();
    let sx = sw as f64 / dw as f64;
    let sy = sh as f64 / dh as f64;
    for v in 0..dh {
        let y = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        for u in 0..dw {
            let x = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
            // Clamped coordinates are always in range.
            let p = sample_bilinear(img, x, y).expect("clamped sample in range");
            out.put_pixel(u, v, p);
        }
    }
}

fn resize_area<P>(img: &Image8<P>, out: &mut Image8<P>)
where
    P: Pixel<Subpixel = u8>,
{
    let (sw, sh) = img.dimensions();
    let (dw, dh) = out.dimensions();
    let sx = sw as f64 / dw as f64;
    let sy = sh as f64 / dh as f64;
    let n = P::CHANNEL_COUNT as usize;
    for v in 0..dh {
        let y_lo = v as f64 * sy;
        let y_hi = y_lo + sy;
        for u in 0..dw {
            let x_lo = u as f64 * sx;
            let x_hi = x_lo + sx;
            let mut acc = [0f64; 4];
            let mut total = 0.0;
            for j in (y_lo.floor() as u32)..(y_hi.ceil() as u32).min(sh) {
                let wy = (y_hi.min(j as f64 + 1.0) - y_lo.max(j as f64)).max(0.0);
                for i in (x_lo.floor() as u32)..(x_hi.ceil() as u32).min(sw) {
                    let wx = (x_hi.min(i as f64 + 1.0) - x_lo.max(i as f64)).max(0.0);
                    let wgt = wx * wy;
                    let px = img.get_pixel(i, j).channels();
                    for c in 0..n {
                        acc[c] += px[c] as f64 * wgt;
                    }
                    total += wgt;
                }
            }
            let mut px = [0u8; 4];
            for c in 0..n {
                px[c] = (acc[c] / total).round().clamp(0.0, 255.0) as u8;
            }
            out.put_pixel(u, v, *P::from_slice(&px[..n]));
        }
    }
}

/// Peak signal-to-noise ratio in dB between two equally sized 8-bit buffers.
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &[u8], b: &[u8]) -> f64 {
    assert_eq!(a.len(), b.len(), "psnr operands differ in length");
    if a.is_empty() {
        return f64::INFINITY;
    }
    let mse = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}
