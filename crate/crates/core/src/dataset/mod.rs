//! Training, validation, and evaluation corpora of simulated cochleagrams.
//!
//! Three recipes are provided:
//!
//! * [`CorpusKind::Classify`]: 288 samples, 72 per glint count, split
//!   232 train / 56 validation.
//! * [`CorpusKind::Gs`]: 32 two-glint samples spanning the glint-spacing
//!   grid, cropped to 100 bins and cut into 640 five-bin windows.
//! * [`CorpusKind::Eval`]: 64 held-out samples built with broadcast
//!   durations never used in training.

mod plan;
mod store;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cochlea::{Cochleagram, CochleagramPipeline};
use crate::echo::{simulate_scene, Broadcast, EchoModelConstants, SonarGeometry, Target, Window};
use crate::error::{Error, Result};
use crate::glint::GsClassGrid;
use crate::io::quantize;

pub use plan::{plan_samples, seed_for, SamplePlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Classify,
    Gs,
    Eval,
}

impl std::str::FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classify" => Ok(CorpusKind::Classify),
            "gs" => Ok(CorpusKind::Gs),
            "eval" => Ok(CorpusKind::Eval),
            _ => Err(Error::param(format!("unknown corpus kind {s:?} (classify, gs, eval)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Eval,
}

/// Everything that determines a corpus. Its SHA-256 goes in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub kind: CorpusKind,
    pub seed: u64,
    /// Echo-to-noise ratio; `None` disables noise.
    pub snr_db: Option<f64>,
    pub window: Window,
    pub geometry: SonarGeometry,
    pub constants: EchoModelConstants,
    pub pipeline: CochleagramPipeline,
    pub grid: GsClassGrid,
    pub recipe: Recipe,
}

/// Counts and grids of the three recipes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub per_class: usize,
    pub validation_per_class: usize,
    /// Single-glint durations span this range (s).
    pub single_duration_range: (f64, f64),
    /// Durations used for multi-glint training samples (s).
    pub multi_durations: Vec<f64>,
    /// Two-glint spacings: linspace(lo, hi, n) (m).
    pub pair_spacings: (f64, f64, usize),
    /// Offsets drawn for 3- and 4-glint targets: linspace(lo, hi, n) (m).
    pub offset_grid: (f64, f64, usize),
    pub gs_duration: f64,
    pub gs_crop: (usize, usize),
    pub gs_window: usize,
    pub eval_durations: Vec<f64>,
    /// Eval spacings and offsets: linspace(0, hi, n) without the 0 point.
    pub eval_grid: (f64, usize),
}

impl Default for Recipe {
    fn default() -> Self {
        Recipe {
            per_class: 72,
            validation_per_class: 14,
            single_duration_range: (0.5e-3, 10e-3),
            multi_durations: vec![0.5e-3, 3e-3, 5e-3],
            pair_spacings: (3e-3, 0.07, 24),
            offset_grid: (3e-3, 0.07, 19),
            gs_duration: 3e-3,
            gs_crop: (50, 100),
            gs_window: 5,
            eval_durations: vec![0.7e-3, 4e-3],
            eval_grid: (0.07, 9),
        }
    }
}

impl CorpusConfig {
    pub fn new(kind: CorpusKind, seed: u64) -> Self {
        CorpusConfig {
            kind,
            seed,
            snr_db: Some(20.0),
            window: Window::Welch,
            geometry: SonarGeometry::default(),
            constants: EchoModelConstants::default(),
            pipeline: CochleagramPipeline::default(),
            grid: GsClassGrid::default(),
            recipe: Recipe::default(),
        }
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One persisted sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: usize,
    /// Path of the matrix relative to the corpus directory.
    pub file: String,
    pub label_glint_count: usize,
    /// Spacing class of the first glint pair; 1- and 2-glint samples only.
    pub label_gs_class: Option<usize>,
    pub glint_offsets: Vec<f64>,
    pub broadcast_duration: f64,
    pub seed: u64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: CorpusConfig,
    pub config_hash: String,
    pub samples: Vec<SampleRecord>,
}

impl DatasetManifest {
    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.samples.iter().filter(|s| s.split == split).map(|s| s.id).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.samples.iter().filter(|s| s.split == split).count()
    }
}

/// A manifest with its cochleagrams loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub cochleagrams: Vec<Cochleagram>,
}

/// Simulates one target and runs it through the cochlear pipeline.
pub fn render_sample(config: &CorpusConfig, offsets: &[f64], duration: f64, seed: u64) -> Result<Cochleagram> {
    let target = Target::from_offsets_merged(offsets)?;
    let broadcast = Broadcast::new(duration, config.window)?;
    let ts = simulate_scene(&broadcast, &target, &config.geometry, &config.constants, config.snr_db, seed)?;
    let mut cg = config.pipeline.run(&ts)?;
    if config.kind == CorpusKind::Gs {
        let (start, len) = config.recipe.gs_crop;
        cg = cg.crop(start, len)?;
    }
    quantize(&mut cg.values);
    Ok(cg)
}

impl Dataset {
    /// Generates every sample of the corpus. Samples are independent and
    /// rendered in parallel; the output does not depend on thread count.
    pub fn generate(config: &CorpusConfig) -> Result<Dataset> {
        let plans = plan_samples(config)?;
        let cochleagrams = plans
            .par_iter()
            .map(|p| render_sample(config, &p.offsets, p.duration, p.seed))
            .collect::<Result<Vec<_>>>()?;
        let samples = plans
            .into_iter()
            .enumerate()
            .map(|(id, p)| SampleRecord {
                id,
                file: format!("samples/{id:04}.f32"),
                label_glint_count: p.glint_count,
                label_gs_class: p.gs_class,
                glint_offsets: p.offsets,
                broadcast_duration: p.duration,
                seed: p.seed,
                split: p.split,
            })
            .collect();
        Ok(Dataset {
            manifest: DatasetManifest { config_hash: config.hash(), config: config.clone(), samples },
            cochleagrams,
        })
    }

    pub fn len(&self) -> usize {
        self.cochleagrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cochleagrams.is_empty()
    }

    /// Five-bin (by default) windows of every sample with its spacing class.
    pub fn gs_windows(&self) -> Vec<(Cochleagram, usize)> {
        let width = self.manifest.config.recipe.gs_window;
        self.manifest
            .samples
            .iter()
            .zip(&self.cochleagrams)
            .flat_map(|(rec, cg)| {
                let class = rec.label_gs_class.unwrap_or(0);
                cg.windows(width).into_iter().map(move |w| (w, class))
            })
            .collect()
    }
}
