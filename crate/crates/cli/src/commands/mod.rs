pub mod augment;
pub mod canny;
pub mod gen_pairs;
pub mod mask;
pub mod rank;
pub mod simulate;

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::Serialize;

use crate::config::PipelineConfig;

pub struct Outcome {
    pub skipped: usize,
}

pub struct Context {
    pub cfg: PipelineConfig,
    pub out: PathBuf,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let out = cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.jobs {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder.build().context("starting worker pool")?;
        Ok(Self { cfg, out, pool })
    }

    /// Maps `f` over `items` on the worker pool; results keep input order.
    pub fn par_map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        self.pool
            .install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Skip {
    pub item: String,
    pub reason: String,
}

/// Written as `manifest.json`; lists every file the run produced.
#[derive(Debug, Serialize)]
pub struct DatasetManifest<E: Serialize> {
    pub command: &'static str,
    pub seed: u64,
    pub counts: std::collections::BTreeMap<&'static str, usize>,
    pub entries: Vec<E>,
    pub skipped: Vec<Skip>,
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn save_png<P, C>(img: &image::ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

/// Files in `dir` with the given extension, sorted by name.
pub fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
