use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::SemanticMap;
use crate::error::{Error, Result};

const SIGMA: f64 = 1.4;
const GAUSS_RADIUS: i64 = 5;
const KERNEL_RADIUS: i64 = GAUSS_RADIUS + 1;
const KERNEL_SIDE: usize = (2 * KERNEL_RADIUS + 1) as usize;
/// Fixed-point scale of the combined kernel; integer sums keep mirrored
/// boundary pixels bit-identical in strength.
const FIXED_ONE: f64 = (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for CannyThresholds {
    fn default() -> Self {
        Self { low: 50.0, high: 150.0 }
    }
}

/// Gaussian (σ = 1.4) convolved with the 3×3 Sobel pair, in fixed point.
fn kernels() -> (Vec<i64>, Vec<i64>) {
    let g: Vec<f64> = (-GAUSS_RADIUS..=GAUSS_RADIUS)
        .map(|i| (-(i * i) as f64 / (2.0 * SIGMA * SIGMA)).exp())
        .collect();
    let sum: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / sum).collect();
    let sobel_x = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let n = KERNEL_SIDE;
    let gl = g.len();
    let mut kx = vec![0.0f64; n * n];
    for (sy, row) in sobel_x.iter().enumerate() {
        for (sx, &s) in row.iter().enumerate() {
            for gy in 0..gl {
                for gx in 0..gl {
                    kx[(sy + gy) * n + sx + gx] += s * g[gy] * g[gx];
                }
            }
        }
    }
    let fixed = |v: f64| (v * FIXED_ONE).round() as i64;
    let kxi: Vec<i64> = kx.iter().map(|&v| fixed(v)).collect();
    // The y kernel is the transpose.
    let kyi = (0..n * n).map(|i| kxi[(i % n) * n + i / n]).collect();
    (kxi, kyi)
}

/// Gradient direction quantized to one of four axes, sign-free.
fn direction(gx: i64, gy: i64) -> (i64, i64) {
    let (gx, gy) = if gy < 0 || (gy == 0 && gx < 0) { (-gx, -gy) } else { (gx, gy) };
    let angle = (gy as f64).atan2(gx as f64).to_degrees();
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Canny edges of the label boundaries of `map`, as a 0/255 image.
///
/// Each pixel's gradient is taken from the indicator of its own label (255
/// inside, 0 elsewhere), smoothed and differentiated with clamped borders.
/// The result depends only on which pixels share a label.
pub fn canny_from_semantic(map: &SemanticMap, thresholds: CannyThresholds) -> Result<GrayImage> {
    let CannyThresholds { low, high } = thresholds;
    if !(low >= 0.0 && high >= low) {
        return Err(Error::invalid(format!("canny thresholds need 0 <= low <= high, got {low}, {high}")));
    }
    let (w, h) = (map.width() as i64, map.height() as i64);
    let labels = map.labels();
    let (kx, ky) = kernels();
    let n = KERNEL_SIDE as i64;
    let at = |x: i64, y: i64| labels[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];

    let mut grad = vec![(0i64, 0i64); (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let own = at(x, y);
            let (mut sx, mut sy) = (0i64, 0i64);
            let mut mixed = false;
            for j in 0..n {
                for i in 0..n {
                    // Correlation with the flipped kernel is convolution.
                    if at(x + KERNEL_RADIUS - i, y + KERNEL_RADIUS - j) == own {
                        let k = (j * n + i) as usize;
                        sx += kx[k];
                        sy += ky[k];
                    } else {
                        mixed = true;
                    }
                }
            }
            if mixed {
                grad[(y * w + x) as usize] = (255 * sx, 255 * sy);
            }
        }
    }

    let mag2 = |(gx, gy): (i64, i64)| (gx as i128) * (gx as i128) + (gy as i128) * (gy as i128);
    let at_mag2 = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w || y >= h {
            0
        } else {
            mag2(grad[(y * w + x) as usize])
        }
    };
    let mut strength = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let g = grad[(y * w + x) as usize];
            let m = mag2(g);
            if m == 0 {
                continue;
            }
            let (dx, dy) = direction(g.0, g.1);
            // Strict against one neighbour, non-strict against the other, so a
            // plateau two pixels wide keeps exactly one.
            if m > at_mag2(x - dx, y - dy) && m >= at_mag2(x + dx, y + dy) {
                strength[(y * w + x) as usize] = (m as f64).sqrt() / FIXED_ONE;
            }
        }
    }

    let mut out = vec![0u8; (w * h) as usize];
    let mut stack: Vec<i64> = (0..w * h)
        .filter(|&i| strength[i as usize] >= high && strength[i as usize] > 0.0)
        .collect();
    for &i in &stack {
        out[i as usize] = 255;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if out[j] == 0 && strength[j] >= low && strength[j] > 0.0 {
                    out[j] = 255;
                    stack.push(j as i64);
                }
            }
        }
    }
    Ok(GrayImage::from_fn(map.width(), map.height(), |x, y| {
        Luma([out[(y as i64 * w + x as i64) as usize]])
    }))
}
