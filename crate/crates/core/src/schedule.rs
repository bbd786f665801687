//! Forward noising `z_t = α_t·z₀ + (1 − α_t)·ε` and the soft latent-blending
//! rule that keeps background latents during the early denoising steps.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmap::Mask;

pub const DEFAULT_BLEND_S: f64 = 0.4;
pub const DEFAULT_TOTAL_STEPS: u32 = 50;

/// Channel-major float grid, `values[(c·height + y)·width + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentHeader {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl LatentGrid {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != channels * height * width {
            return Err(Error::invalid(format!(
                "{} values for a {channels}x{height}x{width} latent",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("latent value {i} is not finite")));
        }
        Ok(Self {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn constant(channels: usize, height: usize, width: usize, v: f64) -> Result<Self> {
        Self::new(channels, height, width, vec![v; channels * height * width])
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    values.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, values)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.values[(c * self.height + y) * self.width + x]
    }

    pub fn header(&self) -> LatentHeader {
        LatentHeader {
            channels: self.channels,
            height: self.height,
            width: self.width,
        }
    }

    fn check_same_shape(&self, other: &LatentGrid, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "{what}: shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Reads `<stem>.json` (`{channels, height, width}`) and `<stem>.raw`
    /// (little-endian f32, channel-major).
    pub fn read(header_path: &Path) -> Result<Self> {
        let f = File::open(header_path).map_err(|e| Error::io(header_path, e))?;
        let header: LatentHeader =
            serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::json(header_path, e))?;
        let raw_path = raw_path(header_path);
        let mut bytes = Vec::new();
        File::open(&raw_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(&raw_path, e))?;
        let n = header.channels * header.height * header.width;
        if bytes.len() != 4 * n {
            return Err(Error::invalid(format!(
                "{}: expected {} bytes, found {}",
                raw_path.display(),
                4 * n,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        Self::new(header.channels, header.height, header.width, values)
    }

    /// Values are stored as f32.
    pub fn write(&self, header_path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.header()).map_err(|e| Error::json(header_path, e))?;
        std::fs::write(header_path, s).map_err(|e| Error::io(header_path, e))?;
        let raw_path = raw_path(header_path);
        let mut f = File::create(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
        let bytes: Vec<u8> = self.values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        f.write_all(&bytes).map_err(|e| Error::io(&raw_path, e))
    }
}

fn raw_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("raw")
}

/// `alpha[t]` for `t = 0..=T`, non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NoiseSchedule {
    alpha: Vec<f64>,
}

impl NoiseSchedule {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::invalid("a schedule needs at least alpha[0] and alpha[T]"));
        }
        if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::invalid(format!("alpha {a} is outside [0, 1]")));
        }
        if alpha.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("alpha must be non-increasing in t"));
        }
        Ok(Self { alpha })
    }

    /// Evenly spaced from 1 at `t = 0` to 0 at `t = T`.
    pub fn linear(total_steps: u32) -> Result<Self> {
        if total_steps == 0 {
            return Err(Error::invalid("schedule needs at least one step"));
        }
        let t = total_steps as f64;
        Self::new((0..=total_steps).map(|i| 1.0 - i as f64 / t).collect())
    }

    pub fn total_steps(&self) -> u32 {
        (self.alpha.len() - 1) as u32
    }

    pub fn alpha(&self, t: u32) -> Result<f64> {
        self.alpha.get(t as usize).copied().ok_or_else(|| {
            Error::invalid(format!("timestep {t} is past T = {}", self.total_steps()))
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::json(path, e))
    }
}

impl TryFrom<Vec<f64>> for NoiseSchedule {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        NoiseSchedule::new(v)
    }
}

impl From<NoiseSchedule> for Vec<f64> {
    fn from(s: NoiseSchedule) -> Self {
        s.alpha
    }
}

/// `α_t·z₀ + (1 − α_t)·ε`, elementwise.
pub fn forward_diffuse(
    z0: &LatentGrid,
    t: u32,
    eps: &LatentGrid,
    schedule: &NoiseSchedule,
) -> Result<LatentGrid> {
    z0.check_same_shape(eps, "forward_diffuse")?;
    let a = schedule.alpha(t)?;
    if a == 1.0 {
        return Ok(z0.clone());
    }
    if a == 0.0 {
        return Ok(eps.clone());
    }
    let values = z0
        .values
        .iter()
        .zip(&eps.values)
        .map(|(&z, &e)| a * z + (1.0 - a) * e)
        .collect();
    Ok(LatentGrid { values, ..*z0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlendConfig {
    pub s: f64,
    pub total_steps: u32,
    /// Dilated foreground mask at latent resolution.
    pub mask: Mask,
}

impl BlendConfig {
    pub fn new(s: f64, total_steps: u32, mask: Mask) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!("s must lie in [0, 1], got {s}")));
        }
        Ok(Self { s, total_steps, mask })
    }

    /// Largest step that still takes the foreground latent alone: ⌊s·T⌋.
    pub fn release_step(&self) -> u32 {
        (self.s * self.total_steps as f64 + 1e-9).floor() as u32
    }
}

/// One blending step: `z_f` when `t ≤ s·T`, otherwise `z_f` inside the mask
/// and `z_b` outside it, the same mask for every channel.
pub fn blend_step(z_f: &LatentGrid, z_b: &LatentGrid, cfg: &BlendConfig, t: u32) -> Result<LatentGrid> {
    z_f.check_same_shape(z_b, "blend_step")?;
    let (mw, mh) = cfg.mask.dimensions();
    if (mh as usize, mw as usize) != (z_f.height, z_f.width) {
        return Err(Error::invalid(format!(
            "mask is {mw}x{mh} but latents are {}x{}",
            z_f.width, z_f.height
        )));
    }
    if t <= cfg.release_step() {
        return Ok(z_f.clone());
    }
    let plane = z_f.height * z_f.width;
    let bits = cfg.mask.bits();
    let values = z_f
        .values
        .iter()
        .zip(&z_b.values)
        .enumerate()
        .map(|(i, (&f, &b))| if bits[i % plane] { f } else { b })
        .collect();
    Ok(LatentGrid { values, ..*z_f })
}

/// Block-max pooling of a pixel mask onto a `width × height` latent grid.
/// Latent cell `(x, y)` covers pixels `⌊x·W/w⌋ .. ⌊(x+1)·W/w⌋`.
pub fn downsample_mask_to_latent(mask: &Mask, width: u32, height: u32) -> Result<Mask> {
    let (mw, mh) = mask.dimensions();
    if width == 0 || height == 0 || width > mw || height > mh {
        return Err(Error::invalid(format!(
            "cannot pool a {mw}x{mh} mask onto {width}x{height}"
        )));
    }
    let edges = |n: u32, big: u32| -> Vec<u32> {
        (0..=n).map(|i| (i as u64 * big as u64 / n as u64) as u32).collect()
    };
    let xs = edges(width, mw);
    let ys = edges(height, mh);
    Ok(Mask::from_fn(width, height, |x, y| {
        (ys[y as usize]..ys[y as usize + 1])
            .any(|py| (xs[x as usize]..xs[x as usize + 1]).any(|px| mask.get(px, py)))
    }))
}
