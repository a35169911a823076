//! Flat `key = value` pipeline configuration.
//!
//! Unknown keys are errors (they are almost always typos); CLI flags
//! override file values.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::audio::FrameSpec;
use crate::diarization::{
    DiarizationConfig, DEFAULT_EMBEDDING_DIM, DEFAULT_SIMILARITY_THRESHOLD, DEFAULT_WINDOW_MS,
};
use crate::linguistics::DEFAULT_TARGET_WORDS;
use crate::prosody::{F0Range, ProsodyConfig, ZcrMinMaxScope};
use crate::{Error, Result};

/// Everything the pipeline commands need.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    // binning
    pub anchor: NaiveDate,
    pub end: NaiveDate,
    pub width_days: u32,
    // diarization
    pub threshold: f64,
    pub window_ms: f64,
    pub embedding_dim: usize,
    // framing
    pub frame_ms: f64,
    pub hop_ms: f64,
    // pitch band
    pub f0_min: f64,
    pub f0_max: f64,
    // linguistics
    pub target_words: Vec<String>,
    pub stopwords: Option<PathBuf>,
    pub top_words: usize,
    // corpus filters
    pub location_tokens: Vec<String>,
    pub location_substrings: Vec<String>,
    // alignment
    pub tolerance_bins: usize,
    // prosody options
    pub zcr_minmax: ZcrMinMaxScope,
    // paths
    pub metadata: Option<PathBuf>,
    pub audio_root: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub embeddings_dir: Option<PathBuf>,
    pub bin_overrides: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out_dir: PathBuf,
    // execution
    pub workers: usize,
    pub emit_masks: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            anchor: NaiveDate::from_ymd_opt(2020, 3, 13).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2020, 6, 1).expect("valid date"),
            width_days: 7,
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
            window_ms: DEFAULT_WINDOW_MS,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            frame_ms: 25.0,
            hop_ms: 10.0,
            f0_min: 60.0,
            f0_max: 400.0,
            target_words: DEFAULT_TARGET_WORDS.iter().map(|w| w.to_string()).collect(),
            stopwords: None,
            top_words: 5,
            location_tokens: vec!["NY".into(), "NYC".into()],
            location_substrings: vec!["New York".into()],
            tolerance_bins: 1,
            zcr_minmax: ZcrMinMaxScope::PerWindow,
            metadata: None,
            audio_root: None,
            events: None,
            references: None,
            embeddings_dir: None,
            bin_overrides: None,
            annotations: None,
            features: None,
            out_dir: PathBuf::from("out"),
            workers: 1,
            emit_masks: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value for {key}: {value:?} ({e})")))
}

fn parse_date(key: &str, value: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|e| Error::Config(format!("bad value for {key}: {value:?} ({e})")))
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl PipelineConfig {
    /// Parse a config file. Lines are `key = value`; blank lines and `#`
    /// comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{} line {}: expected `key = value`, got {line:?}",
                    path.display(),
                    i + 1
                )));
            };
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Apply one key/value pair (file lines and CLI overrides funnel here).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "anchor" => self.anchor = parse_date(key, value)?,
            "end" => self.end = parse_date(key, value)?,
            "width_days" => self.width_days = parse_value(key, value)?,
            "threshold" => self.threshold = parse_value(key, value)?,
            "window_ms" => self.window_ms = parse_value(key, value)?,
            "embedding_dim" => self.embedding_dim = parse_value(key, value)?,
            "frame_ms" => self.frame_ms = parse_value(key, value)?,
            "hop_ms" => self.hop_ms = parse_value(key, value)?,
            "f0_min" => self.f0_min = parse_value(key, value)?,
            "f0_max" => self.f0_max = parse_value(key, value)?,
            "target_words" => self.target_words = parse_list(value),
            "stopwords" => self.stopwords = Some(PathBuf::from(value)),
            "top_words" => self.top_words = parse_value(key, value)?,
            "location_tokens" => self.location_tokens = parse_list(value),
            "location_substrings" => self.location_substrings = parse_list(value),
            "tolerance_bins" => self.tolerance_bins = parse_value(key, value)?,
            "zcr_minmax" => {
                self.zcr_minmax = match value {
                    "window" => ZcrMinMaxScope::PerWindow,
                    "global" => ZcrMinMaxScope::Global,
                    other => {
                        return Err(Error::Config(format!(
                            "zcr_minmax must be `window` or `global`, got {other:?}"
                        )))
                    }
                }
            }
            "metadata" => self.metadata = Some(PathBuf::from(value)),
            "audio_root" => self.audio_root = Some(PathBuf::from(value)),
            "events" => self.events = Some(PathBuf::from(value)),
            "references" => self.references = Some(PathBuf::from(value)),
            "embeddings_dir" => self.embeddings_dir = Some(PathBuf::from(value)),
            "bin_overrides" => self.bin_overrides = Some(PathBuf::from(value)),
            "annotations" => self.annotations = Some(PathBuf::from(value)),
            "features" => self.features = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse_value(key, value)?,
            "emit_masks" => self.emit_masks = parse_value(key, value)?,
            unknown => {
                return Err(Error::Config(format!("unknown config key {unknown:?}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.anchor > self.end {
            return Err(Error::Config(format!(
                "anchor {} is after end {}",
                self.anchor, self.end
            )));
        }
        if self.width_days == 0 {
            return Err(Error::Config("width_days must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold must lie in [-1, 1], got {}",
                self.threshold
            )));
        }
        for (name, value) in [
            ("window_ms", self.window_ms),
            ("frame_ms", self.frame_ms),
            ("hop_ms", self.hop_ms),
            ("f0_min", self.f0_min),
            ("f0_max", self.f0_max),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.hop_ms <= self.frame_ms && self.frame_ms <= self.window_ms) {
            return Err(Error::Config(format!(
                "expected hop_ms <= frame_ms <= window_ms, got {} / {} / {}",
                self.hop_ms, self.frame_ms, self.window_ms
            )));
        }
        if self.f0_min >= self.f0_max {
            return Err(Error::Config(format!(
                "f0_min {} must be below f0_max {}",
                self.f0_min, self.f0_max
            )));
        }
        if self.embedding_dim < 2 || !self.embedding_dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "embedding_dim must be even and >= 2, got {}",
                self.embedding_dim
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.top_words == 0 {
            return Err(Error::Config("top_words must be at least 1".into()));
        }
        if self.location_tokens.is_empty() && self.location_substrings.is_empty() {
            return Err(Error::Config(
                "at least one of location_tokens / location_substrings is required".into(),
            ));
        }
        Ok(())
    }

    pub fn frame_spec(&self) -> FrameSpec {
        FrameSpec::new(self.frame_ms, self.hop_ms).expect("validated config")
    }

    /// The feature table `report` consumes: the explicit `features` path, or
    /// the `extract` output inside `out_dir`.
    pub fn features_path(&self) -> PathBuf {
        self.features
            .clone()
            .unwrap_or_else(|| self.out_dir.join("features.csv"))
    }

    pub fn diarization(&self) -> DiarizationConfig {
        DiarizationConfig {
            threshold: self.threshold,
            window_ms: self.window_ms,
            embedding_dim: self.embedding_dim,
            frame_spec: self.frame_spec(),
        }
    }

    pub fn prosody(&self) -> ProsodyConfig {
        ProsodyConfig {
            frame_spec: self.frame_spec(),
            f0: F0Range::new(self.f0_min, self.f0_max).expect("validated config"),
            zcr_minmax: self.zcr_minmax,
        }
    }
}
