//! Frame-level prosodic features (loudness, ZCR, jitter, shimmer) and their
//! aggregation into the 18-dimensional per-recording descriptor vector.
//!
//! Definitions:
//! - loudness: frame RMS amplitude.
//! - ZCR: strict sign changes over consecutive sample pairs / (L - 1), zero
//!   treated as nonnegative.
//! - jitter/shimmer: relative local perturbation of the per-frame pitch
//!   period / peak amplitude over the voiced-frame subsequence.
//!
//! Per retained 125 ms window, each feature yields a frame-level series whose
//! mean / population std / skewness / OLS slope are the window descriptors;
//! the recording vector is the arithmetic mean of the window descriptors over
//! all retained windows. ZCR additionally contributes min and max.

use crate::audio::{frame_slices, windows, AudioBuffer, FrameSpec};
use crate::diarization::SpeechMask;
use crate::{Error, Result};

/// Voicing gate on the normalized autocorrelation peak.
pub const VOICING_THRESHOLD: f64 = 0.5;
/// Frames quieter than this RMS are never voiced.
pub const VOICING_RMS_GATE: f64 = 1e-4;

/// Lag picking: the first local maximum within this margin of the best value
/// wins, which keeps periodic signals from locking onto period multiples.
/// A true period midway between integer lags samples the correlation peak
/// at most 1 - cos(pi/lag) below its continuous height, so the margin widens
/// at short lags.
fn lag_pick_margin(lag: usize) -> f64 {
    1.0 - (std::f64::consts::PI / lag as f64).cos() + 0.005
}

/// Fundamental-frequency search band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Range {
    pub min_hz: f64,
    pub max_hz: f64,
}

impl F0Range {
    pub fn new(min_hz: f64, max_hz: f64) -> Result<Self> {
        let ordered = min_hz.is_finite() && max_hz.is_finite() && min_hz > 0.0 && max_hz > min_hz;
        if !ordered {
            return Err(Error::invalid(format!(
                "f0 range must satisfy 0 < min < max, got [{min_hz}, {max_hz}]"
            )));
        }
        Ok(Self { min_hz, max_hz })
    }
}

impl Default for F0Range {
    /// The standard speech band, 60-400 Hz.
    fn default() -> Self {
        Self {
            min_hz: 60.0,
            max_hz: 400.0,
        }
    }
}

/// Per-frame feature sample. `period_s` and `peak_amplitude` are present iff
/// the frame is voiced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeatures {
    pub loudness: f64,
    pub zcr: f64,
    pub voiced: bool,
    pub period_s: Option<f64>,
    pub peak_amplitude: Option<f64>,
}

impl FrameFeatures {
    pub fn unvoiced(loudness: f64, zcr: f64) -> Self {
        Self {
            loudness,
            zcr,
            voiced: false,
            period_s: None,
            peak_amplitude: None,
        }
    }

    pub fn voiced(loudness: f64, zcr: f64, period_s: f64, peak_amplitude: f64) -> Self {
        Self {
            loudness,
            zcr,
            voiced: true,
            period_s: Some(period_s),
            peak_amplitude: Some(peak_amplitude),
        }
    }
}

/// Fraction of consecutive sample pairs with a strict sign change, zero
/// treated as nonnegative.
pub fn zcr(frame: &[f64]) -> Result<f64> {
    if frame.len() < 2 {
        return Err(Error::invalid("zcr requires at least 2 samples"));
    }
    let changes = frame
        .windows(2)
        .filter(|pair| (pair[0] >= 0.0) != (pair[1] >= 0.0))
        .count();
    Ok(changes as f64 / (frame.len() - 1) as f64)
}

/// Root-mean-square amplitude; 0 for an empty frame.
pub fn loudness(frame: &[f64]) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    (frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64).sqrt()
}

fn analyze_frame(frame: &[f64], sample_rate: u32, f0: &F0Range) -> FrameFeatures {
    let rms = loudness(frame);
    let z = if frame.len() >= 2 {
        zcr(frame).expect("length checked")
    } else {
        0.0
    };

    let len = frame.len();
    let sr = sample_rate as f64;
    let lag_min = (sr / f0.max_hz).ceil() as usize;
    let lag_max = ((sr / f0.min_hz).floor() as usize).min(len.saturating_sub(1));
    if rms < VOICING_RMS_GATE || lag_min < 1 || lag_min > lag_max {
        return FrameFeatures::unvoiced(rms, z);
    }

    // Energy-normalized autocorrelation over the lag band.
    let mut nacf = vec![0.0f64; lag_max + 1];
    for lag in lag_min..=lag_max {
        let head = &frame[..len - lag];
        let tail = &frame[lag..];
        let num: f64 = head.iter().zip(tail).map(|(a, b)| a * b).sum();
        let e1: f64 = head.iter().map(|s| s * s).sum();
        let e2: f64 = tail.iter().map(|s| s * s).sum();
        if e1 > 0.0 && e2 > 0.0 {
            nacf[lag] = num / (e1 * e2).sqrt();
        }
    }
    let best = nacf[lag_min..=lag_max]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if best < VOICING_THRESHOLD {
        return FrameFeatures::unvoiced(rms, z);
    }

    let is_local_max = |lag: usize| {
        let left = if lag > lag_min {
            nacf[lag - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if lag < lag_max {
            nacf[lag + 1]
        } else {
            f64::NEG_INFINITY
        };
        nacf[lag] >= left && nacf[lag] >= right
    };
    let lag = (lag_min..=lag_max)
        .find(|&l| nacf[l] >= best - lag_pick_margin(l) && is_local_max(l))
        .unwrap_or_else(|| {
            (lag_min..=lag_max)
                .max_by(|&a, &b| nacf[a].partial_cmp(&nacf[b]).expect("finite nacf"))
                .expect("nonempty lag range")
        });

    // Peak amplitude over one detected period centered on the frame.
    let center = len / 2;
    let start = center.saturating_sub(lag / 2);
    let end = (start + lag).min(len);
    let peak = frame[start..end]
        .iter()
        .map(|s| s.abs())
        .fold(0.0f64, f64::max);

    FrameFeatures::voiced(rms, z, lag as f64 / sr, peak)
}

/// Per-frame loudness, ZCR, and voicing/period/peak estimates for one
/// analysis window. A window too short for a single full frame is analyzed
/// as one whole-window frame.
pub fn pitch_track(
    window: &[f64],
    sample_rate: u32,
    spec: &FrameSpec,
    f0: &F0Range,
) -> Vec<FrameFeatures> {
    if window.is_empty() {
        return Vec::new();
    }
    let len = spec.frame_len(sample_rate);
    let hop = spec.hop_len(sample_rate);
    let frames = frame_slices(window, len, hop);
    if frames.is_empty() {
        return vec![analyze_frame(window, sample_rate, f0)];
    }
    frames
        .iter()
        .map(|frame| analyze_frame(frame, sample_rate, f0))
        .collect()
}

/// Per-pair relative period perturbation over the voiced-frame subsequence;
/// empty with fewer than 2 voiced frames.
fn jitter_series(frames: &[FrameFeatures]) -> Vec<f64> {
    let periods: Vec<f64> = frames.iter().filter_map(|f| f.period_s).collect();
    if periods.len() < 2 {
        return Vec::new();
    }
    let mean_period = periods.iter().sum::<f64>() / periods.len() as f64;
    periods
        .windows(2)
        .map(|pair| (pair[1] - pair[0]).abs() / mean_period)
        .collect()
}

/// Per-pair relative peak-amplitude perturbation over the voiced-frame
/// subsequence; empty with fewer than 2 voiced frames or zero mean amplitude.
fn shimmer_series(frames: &[FrameFeatures]) -> Vec<f64> {
    let peaks: Vec<f64> = frames.iter().filter_map(|f| f.peak_amplitude).collect();
    if peaks.len() < 2 {
        return Vec::new();
    }
    let mean_peak = peaks.iter().sum::<f64>() / peaks.len() as f64;
    if mean_peak == 0.0 {
        return Vec::new();
    }
    peaks
        .windows(2)
        .map(|pair| (pair[1] - pair[0]).abs() / mean_peak)
        .collect()
}

/// Relative local jitter: mean |T(i+1) - T(i)| / mean T over voiced frames;
/// 0 with fewer than 2 voiced frames.
pub fn jitter(frames: &[FrameFeatures]) -> f64 {
    let series = jitter_series(frames);
    if series.is_empty() {
        0.0
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    }
}

/// Relative local shimmer: mean |A(i+1) - A(i)| / mean A over voiced frames;
/// 0 with fewer than 2 voiced frames or zero mean amplitude.
pub fn shimmer(frames: &[FrameFeatures]) -> f64 {
    let series = shimmer_series(frames);
    if series.is_empty() {
        0.0
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    }
}

/// Mean, population standard deviation, skewness, and OLS slope against the
/// series index.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DescriptorStats {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub slope: f64,
}

/// Summary statistics of a frame-level feature series. Skewness is 0 for a
/// constant series; slope is 0 for a single-element series.
pub fn descriptor_stats(series: &[f64]) -> Result<DescriptorStats> {
    if series.is_empty() {
        return Err(Error::invalid(
            "descriptor_stats requires a nonempty series",
        ));
    }
    // constant series: keep std/skew/slope exactly zero instead of picking
    // up rounding noise from the mean
    if series.windows(2).all(|pair| pair[0] == pair[1]) {
        return Ok(DescriptorStats {
            mean: series[0],
            std: 0.0,
            skewness: 0.0,
            slope: 0.0,
        });
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let m2 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = series.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let std = m2.sqrt();
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    let slope = if series.len() == 1 {
        0.0
    } else {
        let idx_mean = (n - 1.0) / 2.0;
        let mut cov = 0.0;
        let mut var = 0.0;
        for (i, x) in series.iter().enumerate() {
            let d = i as f64 - idx_mean;
            cov += d * (x - mean);
            var += d * d;
        }
        cov / var
    };
    Ok(DescriptorStats {
        mean,
        std,
        skewness,
        slope,
    })
}

fn stats_or_zero(series: &[f64]) -> DescriptorStats {
    if series.is_empty() {
        DescriptorStats::default()
    } else {
        descriptor_stats(series).expect("nonempty series")
    }
}

/// Scope of the two extra ZCR descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZcrMinMaxScope {
    /// Window-level min/max averaged across windows, like the other
    /// descriptors.
    #[default]
    PerWindow,
    /// Min/max over every frame of every retained window.
    Global,
}

/// The 18 per-recording descriptors, in the documented column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsodyVector {
    pub loudness: DescriptorStats,
    pub zcr: DescriptorStats,
    pub jitter: DescriptorStats,
    pub shimmer: DescriptorStats,
    pub zcr_min: f64,
    pub zcr_max: f64,
}

/// Column order of the per-recording feature CSV. This order is a stable
/// external contract.
pub const FEATURE_COLUMNS: [&str; 18] = [
    "loudness_mean",
    "loudness_std",
    "loudness_skew",
    "loudness_slope",
    "zcr_mean",
    "zcr_std",
    "zcr_skew",
    "zcr_slope",
    "jitter_mean",
    "jitter_std",
    "jitter_skew",
    "jitter_slope",
    "shimmer_mean",
    "shimmer_std",
    "shimmer_skew",
    "shimmer_slope",
    "zcr_min",
    "zcr_max",
];

impl ProsodyVector {
    pub fn to_array(&self) -> [f64; 18] {
        let s = |d: &DescriptorStats| [d.mean, d.std, d.skewness, d.slope];
        let [lm, ls, lk, lp] = s(&self.loudness);
        let [zm, zs, zk, zp] = s(&self.zcr);
        let [jm, js, jk, jp] = s(&self.jitter);
        let [sm, ss, sk, sp] = s(&self.shimmer);
        [
            lm,
            ls,
            lk,
            lp,
            zm,
            zs,
            zk,
            zp,
            jm,
            js,
            jk,
            jp,
            sm,
            ss,
            sk,
            sp,
            self.zcr_min,
            self.zcr_max,
        ]
    }

    pub fn from_array(values: [f64; 18]) -> Self {
        let stats = |v: &[f64]| DescriptorStats {
            mean: v[0],
            std: v[1],
            skewness: v[2],
            slope: v[3],
        };
        Self {
            loudness: stats(&values[0..4]),
            zcr: stats(&values[4..8]),
            jitter: stats(&values[8..12]),
            shimmer: stats(&values[12..16]),
            zcr_min: values[16],
            zcr_max: values[17],
        }
    }

    /// Componentwise arithmetic mean; `None` for an empty slice.
    pub fn mean_of(vectors: &[ProsodyVector]) -> Option<ProsodyVector> {
        if vectors.is_empty() {
            return None;
        }
        let mut acc = [0.0f64; 18];
        for v in vectors {
            for (a, x) in acc.iter_mut().zip(v.to_array()) {
                *a += x;
            }
        }
        for a in acc.iter_mut() {
            *a /= vectors.len() as f64;
        }
        Some(ProsodyVector::from_array(acc))
    }
}

/// Analysis parameters for [`prosody_vector`].
#[derive(Debug, Clone, Default)]
pub struct ProsodyConfig {
    pub frame_spec: FrameSpec,
    pub f0: F0Range,
    pub zcr_minmax: ZcrMinMaxScope,
}

/// Compute the 18-dimensional descriptor vector over the mask-retained
/// windows of a recording.
pub fn prosody_vector(
    buffer: &AudioBuffer,
    mask: &SpeechMask,
    cfg: &ProsodyConfig,
) -> Result<ProsodyVector> {
    let wins = windows(buffer, mask.window_ms);
    if wins.len() != mask.len() {
        return Err(Error::invalid(format!(
            "mask has {} windows but the buffer yields {}",
            mask.len(),
            wins.len()
        )));
    }

    let mut acc = [0.0f64; 18];
    let mut retained = 0usize;
    let mut global_zcr_min = f64::INFINITY;
    let mut global_zcr_max = f64::NEG_INFINITY;

    for window in wins {
        if !mask.flags[window.index] {
            continue;
        }
        let frames = pitch_track(
            window.samples,
            buffer.sample_rate_hz,
            &cfg.frame_spec,
            &cfg.f0,
        );
        debug_assert!(!frames.is_empty(), "retained window yields frames");

        let loud_series: Vec<f64> = frames.iter().map(|f| f.loudness).collect();
        let zcr_series: Vec<f64> = frames.iter().map(|f| f.zcr).collect();
        let jit_series = jitter_series(&frames);
        let shim_series = shimmer_series(&frames);

        let loud = stats_or_zero(&loud_series);
        let zcr_stats = stats_or_zero(&zcr_series);
        let jit = stats_or_zero(&jit_series);
        let shim = stats_or_zero(&shim_series);
        let window_zcr_min = zcr_series.iter().copied().fold(f64::INFINITY, f64::min);
        let window_zcr_max = zcr_series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        global_zcr_min = global_zcr_min.min(window_zcr_min);
        global_zcr_max = global_zcr_max.max(window_zcr_max);

        let window_vector = ProsodyVector {
            loudness: loud,
            zcr: zcr_stats,
            jitter: jit,
            shimmer: shim,
            zcr_min: window_zcr_min,
            zcr_max: window_zcr_max,
        };
        for (a, x) in acc.iter_mut().zip(window_vector.to_array()) {
            *a += x;
        }
        retained += 1;
    }

    if retained == 0 {
        return Err(Error::NoSpeechRetained);
    }
    for a in acc.iter_mut() {
        *a /= retained as f64;
    }
    let mut vector = ProsodyVector::from_array(acc);
    if cfg.zcr_minmax == ZcrMinMaxScope::Global {
        vector.zcr_min = global_zcr_min;
        vector.zcr_max = global_zcr_max;
    }
    Ok(vector)
}
