use std::path::{Path, PathBuf};

use anyhow::Result;
use corpusalign_core::io::read_json;
use corpusalign_core::pairing::DEFAULT_DATE_FORMATS;
use corpusalign_core::{
    AlignParams, LearningCurve, NoiseParams, PairWeights, Predicate, SearchMode, SegmenterParams, SplitParams,
};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub segments: Option<PathBuf>,
    pub hypotheses: Option<PathBuf>,
    pub transcripts: Option<PathBuf>,
    pub audio_meta: Option<PathBuf>,
    pub transcript_meta: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            input: None,
            rules: None,
            regions: None,
            segments: None,
            hypotheses: None,
            transcripts: None,
            audio_meta: None,
            transcript_meta: None,
            pairs: None,
            pool: None,
            manifest: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairingConfig {
    pub weights: PairWeights,
    pub accept_threshold: f64,
    pub min_overlap: f64,
    /// Hypotheses per audio session used for the vocabulary check.
    pub sample_size: usize,
    pub date_formats: Vec<String>,
}

impl Default for PairingConfig {
    fn default() -> Self {
        Self {
            weights: PairWeights::default(),
            accept_threshold: 0.6,
            min_overlap: 0.3,
            sample_size: 10,
            date_formats: DEFAULT_DATE_FORMATS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineSection {
    pub max_passes: usize,
    pub min_relative_gain: f64,
    /// Simulated recognizer: error rates as a function of retained hours.
    pub curve: LearningCurve,
}

impl Default for RefineSection {
    fn default() -> Self {
        Self {
            max_passes: 3,
            min_relative_gain: 0.02,
            curve: LearningCurve { initial_rates: NoiseParams::with_total(0.25, 0), floor_rate: 0.05, halving_hours: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSection {
    pub sessions: usize,
    pub minutes: f64,
    pub chars_per_second: f64,
    /// Recognizer noise used for the bundled hypotheses.
    pub noise: f64,
    pub divergence: (f64, f64),
    pub difficulty: (f64, f64),
}

impl Default for SynthSection {
    fn default() -> Self {
        Self { sessions: 3, minutes: 10.0, chars_per_second: 12.0, noise: 0.1, divergence: (0.0, 0.1), difficulty: (0.6, 1.6) }
    }
}

/// Everything a stage reads, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub language_code: String,
    pub paths: Paths,
    pub segmenter: SegmenterParams,
    pub align: AlignParams,
    pub search_mode: SearchMode,
    pub pairing: PairingConfig,
    pub refine: RefineSection,
    pub split: SplitParams,
    pub filter: Predicate,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            language_code: "und".into(),
            paths: Paths::default(),
            segmenter: SegmenterParams::default(),
            align: AlignParams::default(),
            search_mode: SearchMode::FullDoc,
            pairing: PairingConfig::default(),
            refine: RefineSection::default(),
            split: SplitParams::default(),
            filter: Predicate::default(),
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => read_json(p).map_err(|e| ConfigError(e.to_string()).into()),
        }
    }

    /// Propagate the global seed and check every parameter block.
    pub fn resolve(mut self) -> Result<Self> {
        self.split.seed = self.seed;
        self.refine.curve.initial_rates.seed = self.seed;
        if self.workers == 0 {
            return Err(ConfigError("workers must be at least 1".into()).into());
        }
        self.segmenter.validate().map_err(config)?;
        self.align.validate().map_err(config)?;
        self.refine.curve.validate().map_err(config)?;
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(ConfigError(format!("train_fraction must lie in (0, 1), got {}", self.split.train_fraction)).into());
        }
        Ok(self)
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        path.as_deref().ok_or_else(|| ConfigError(format!("missing input path: {what}")).into())
    }
}

pub fn config(e: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(e.to_string()).into()
}
