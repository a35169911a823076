//! Per-window retain/reject decisions against a labeled reference segment of
//! the target speaker.
//!
//! Each 125 ms window is embedded into a fixed-dimension space and compared
//! to the embedding of the whole reference segment by cosine similarity; a
//! window is retained iff its similarity reaches the threshold (default
//! 0.65).
//!
//! The built-in embedder is deterministic: Hann-windowed 25 ms / 10 ms frames
//! are mapped to natural-log energies of D/2 mel-spaced triangular bands
//! (floor 1e-10); the embedding concatenates the per-band mean and standard
//! deviation of those log energies over the frames, L2-normalized unless all
//! zero. True speaker embeddings computed elsewhere can be substituted per
//! window through the embedding exchange file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{frame_slices, windows, AudioBuffer, FrameSpec};
use crate::{Error, Result};

/// Default similarity threshold for retaining a window.
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.65;
/// Default analysis window in milliseconds.
pub const DEFAULT_WINDOW_MS: f64 = 125.0;
/// Default embedding dimension.
pub const DEFAULT_EMBEDDING_DIM: usize = 256;
/// Log-energy floor applied before taking the natural log.
const ENERGY_FLOOR: f64 = 1e-10;

/// Fixed-length speaker embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("embedding must have positive dimension"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding entries must be finite"));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// cos(a, b) = dot/(|a|·|b|), clamped into [-1, 1]; 0 if either norm is 0.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "embedding dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let norm_a = a.norm();
    let norm_b = b.norm();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (norm_a * norm_b)).clamp(-1.0, 1.0))
}

fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n.max(1)];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Sparse triangular filters: per band, the (bin, weight) pairs.
fn mel_filterbank(n_bands: usize, frame_len: usize, sample_rate: f64) -> Vec<Vec<(usize, f64)>> {
    let n_bins = frame_len / 2 + 1;
    let top_mel = hz_to_mel(sample_rate / 2.0);
    let points: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(top_mel * i as f64 / (n_bands + 1) as f64))
        .collect();
    let bin_hz = |k: usize| k as f64 * sample_rate / frame_len as f64;
    (0..n_bands)
        .map(|b| {
            let (lo, center, hi) = (points[b], points[b + 1], points[b + 2]);
            let mut taps = Vec::new();
            for k in 0..n_bins {
                let f = bin_hz(k);
                let w = if f >= lo && f <= center && center > lo {
                    (f - lo) / (center - lo)
                } else if f > center && f <= hi && hi > center {
                    (hi - f) / (hi - center)
                } else {
                    0.0
                };
                if w > 0.0 {
                    taps.push((k, w));
                }
            }
            taps
        })
        .collect()
}

/// Deterministic mel-band-statistics embedder.
#[derive(Debug, Clone)]
pub struct MelEmbedder {
    dim: usize,
    frame_spec: FrameSpec,
}

impl MelEmbedder {
    pub fn new(dim: usize, frame_spec: FrameSpec) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "embedding dimension must be even and >= 2, got {dim}"
            )));
        }
        Ok(Self { dim, frame_spec })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embed one stretch of audio. A stretch too short for a single full
    /// frame is analyzed as one whole frame. An all-zero (silent) input maps
    /// to the all-zero vector, which cosine scoring treats as similarity 0.
    pub fn embed(&self, samples: &[f64], sample_rate: u32) -> Result<EmbeddingVector> {
        if samples.is_empty() {
            return Err(Error::invalid("cannot embed an empty window"));
        }
        if samples.iter().all(|&s| s == 0.0) {
            return Ok(EmbeddingVector {
                values: vec![0.0; self.dim],
            });
        }

        let frame_len = self.frame_spec.frame_len(sample_rate);
        let hop = self.frame_spec.hop_len(sample_rate);
        let frames = frame_slices(samples, frame_len, hop);
        let frames: Vec<&[f64]> = if frames.is_empty() {
            vec![samples]
        } else {
            frames
        };

        let n_bands = self.dim / 2;
        let len = frames[0].len();
        let window = hann(len);
        let filterbank = mel_filterbank(n_bands, len, sample_rate as f64);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);

        // per-band log energies, frames x bands
        let mut log_energies = vec![vec![0.0f64; n_bands]; frames.len()];
        let mut spectrum = vec![Complex::new(0.0, 0.0); len];
        for (fi, frame) in frames.iter().enumerate() {
            for (slot, (&s, &w)) in spectrum.iter_mut().zip(frame.iter().zip(&window)) {
                *slot = Complex::new(s * w, 0.0);
            }
            fft.process(&mut spectrum);
            let power: Vec<f64> = spectrum[..len / 2 + 1]
                .iter()
                .map(|c| c.re * c.re + c.im * c.im)
                .collect();
            for (b, taps) in filterbank.iter().enumerate() {
                let energy: f64 = taps.iter().map(|&(k, w)| power[k] * w).sum();
                log_energies[fi][b] = energy.max(ENERGY_FLOOR).ln();
            }
        }

        let n = frames.len() as f64;
        let mut values = vec![0.0f64; self.dim];
        for b in 0..n_bands {
            let mean = log_energies.iter().map(|f| f[b]).sum::<f64>() / n;
            let var = log_energies
                .iter()
                .map(|f| (f[b] - mean).powi(2))
                .sum::<f64>()
                / n;
            values[b] = mean;
            values[n_bands + b] = var.sqrt();
        }

        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in values.iter_mut() {
                *v /= norm;
            }
        }
        Ok(EmbeddingVector { values })
    }
}

impl Default for MelEmbedder {
    fn default() -> Self {
        Self {
            dim: DEFAULT_EMBEDDING_DIM,
            frame_spec: FrameSpec::default(),
        }
    }
}

/// A manually labeled stretch of the target speaker, nominally 5 seconds.
#[derive(Debug, Clone)]
pub struct ReferenceSegment {
    audio: AudioBuffer,
}

impl ReferenceSegment {
    pub const NOMINAL_DURATION_S: f64 = 5.0;
    pub const MIN_DURATION_S: f64 = 1.0;
    pub const MAX_DURATION_S: f64 = 30.0;

    pub fn new(audio: AudioBuffer) -> Result<Self> {
        let duration = audio.duration_s();
        if audio.is_empty() || !(Self::MIN_DURATION_S..=Self::MAX_DURATION_S).contains(&duration) {
            return Err(Error::invalid(format!(
                "reference segment must last between {} and {} s, got {duration:.3} s",
                Self::MIN_DURATION_S,
                Self::MAX_DURATION_S
            )));
        }
        Ok(Self { audio })
    }

    pub fn audio(&self) -> &AudioBuffer {
        &self.audio
    }
}

/// Per-window retention decisions and the similarities behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechMask {
    pub window_ms: f64,
    pub flags: Vec<bool>,
    pub similarity: Vec<f64>,
}

impl SpeechMask {
    /// Threshold a similarity list into a mask; flags[i] = similarity[i] >= threshold.
    pub fn from_similarities(similarity: Vec<f64>, threshold: f64, window_ms: f64) -> Self {
        let flags = similarity.iter().map(|&s| s >= threshold).collect();
        Self {
            window_ms,
            flags,
            similarity,
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn retained_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// CSV rendering: `window_index,start_ms,similarity,retained`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_index,start_ms,similarity,retained\n");
        for (i, (&sim, &flag)) in self.similarity.iter().zip(&self.flags).enumerate() {
            let start_ms = i as f64 * self.window_ms;
            writeln!(out, "{i},{start_ms},{sim},{flag}").expect("string write");
        }
        out
    }
}

/// Parameters of the diarization stage.
#[derive(Debug, Clone)]
pub struct DiarizationConfig {
    pub threshold: f64,
    pub window_ms: f64,
    pub embedding_dim: usize,
    pub frame_spec: FrameSpec,
}

impl Default for DiarizationConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
            window_ms: DEFAULT_WINDOW_MS,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            frame_spec: FrameSpec::default(),
        }
    }
}

/// Externally supplied per-window embeddings, replacing the built-in
/// embedder for the windows they cover.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingOverrides {
    dim: Option<usize>,
    map: BTreeMap<usize, EmbeddingVector>,
}

impl EmbeddingOverrides {
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn get(&self, window_index: usize) -> Option<&EmbeddingVector> {
        self.map.get(&window_index)
    }
}

/// Parse the embedding exchange format: a `dim=<D>` header line, then one
/// row per window: `<window_index> <v1> ... <vD>` space-separated. An empty
/// file yields an empty mapping (the built-in embedder then covers every
/// window).
pub fn load_external_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingOverrides> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let Some((header_line, header)) = lines.next() else {
        return Ok(EmbeddingOverrides::default());
    };
    let dim: usize = header
        .strip_prefix("dim=")
        .ok_or_else(|| Error::EmbeddingLoad {
            path: path.to_path_buf(),
            line: header_line,
            detail: format!("expected `dim=<D>` header, got {header:?}"),
        })?
        .parse()
        .map_err(|e| Error::EmbeddingLoad {
            path: path.to_path_buf(),
            line: header_line,
            detail: format!("bad dimension: {e}"),
        })?;
    if dim == 0 {
        return Err(Error::EmbeddingLoad {
            path: path.to_path_buf(),
            line: header_line,
            detail: "dimension must be positive".into(),
        });
    }

    let mut map = BTreeMap::new();
    for (line_no, line) in lines {
        let mut parts = line.split_whitespace();
        let index: usize =
            parts
                .next()
                .expect("nonempty line")
                .parse()
                .map_err(|e| Error::EmbeddingLoad {
                    path: path.to_path_buf(),
                    line: line_no,
                    detail: format!("bad window index: {e}"),
                })?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|e| Error::EmbeddingLoad {
                    path: path.to_path_buf(),
                    line: line_no,
                    detail: format!("bad value {p:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::EmbeddingLoad {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("expected {dim} values, got {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EmbeddingLoad {
                path: path.to_path_buf(),
                line: line_no,
                detail: "embedding values must be finite".into(),
            });
        }
        if map.insert(index, EmbeddingVector { values }).is_some() {
            return Err(Error::EmbeddingLoad {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("duplicate window index {index}"),
            });
        }
    }
    Ok(EmbeddingOverrides {
        dim: Some(dim),
        map,
    })
}

/// Diarize with the built-in embedder only.
pub fn diarize(
    buffer: &AudioBuffer,
    reference: &ReferenceSegment,
    cfg: &DiarizationConfig,
) -> Result<SpeechMask> {
    diarize_with_embeddings(buffer, reference, cfg, &EmbeddingOverrides::default())
}

/// Diarize, preferring externally supplied embeddings for the windows they
/// cover. The reference embedding is always computed on the whole reference
/// segment as one unit.
pub fn diarize_with_embeddings(
    buffer: &AudioBuffer,
    reference: &ReferenceSegment,
    cfg: &DiarizationConfig,
    overrides: &EmbeddingOverrides,
) -> Result<SpeechMask> {
    if let Some(dim) = overrides.dim() {
        if dim != cfg.embedding_dim {
            return Err(Error::invalid(format!(
                "external embeddings have dimension {dim}, configured {}",
                cfg.embedding_dim
            )));
        }
    }
    let wins = windows(buffer, cfg.window_ms);
    if wins.is_empty() {
        return Err(Error::NoAnalyzableAudio);
    }
    let embedder = MelEmbedder::new(cfg.embedding_dim, cfg.frame_spec)?;
    let reference_embedding =
        embedder.embed(&reference.audio().samples, reference.audio().sample_rate_hz)?;

    let mut similarity = Vec::with_capacity(wins.len());
    for window in &wins {
        let sim = match overrides.get(window.index) {
            Some(external) => cosine_similarity(external, &reference_embedding)?,
            None => {
                let embedding = embedder.embed(window.samples, buffer.sample_rate_hz)?;
                cosine_similarity(&embedding, &reference_embedding)?
            }
        };
        similarity.push(sim);
    }
    Ok(SpeechMask::from_similarities(
        similarity,
        cfg.threshold,
        cfg.window_ms,
    ))
}
