//! WAV decoding and the framing/windowing primitives shared by diarization
//! and prosody.
//!
//! Decoding accepts linear-PCM RIFF WAV only (8/16/24/32-bit integer or
//! 32-bit float). Integer samples are scaled into [-1, 1] by the type's max
//! magnitude; multichannel input is downmixed by per-sample channel mean.
//! There is no resampling stage: every downstream descriptor is either
//! dimensionless or rate-relative, so mixed-rate corpora are fine.

use std::io;
use std::path::Path;

use crate::{Error, Result};

/// Mono audio signal with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("audio samples must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Sub-range view as a new buffer (used for cutting reference segments).
    pub fn slice(&self, start: usize, end: usize) -> Result<AudioBuffer> {
        if start > end || end > self.samples.len() {
            return Err(Error::invalid(format!(
                "slice [{start}, {end}) out of bounds for buffer of {} samples",
                self.samples.len()
            )));
        }
        Ok(AudioBuffer {
            samples: self.samples[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

/// Short-time analysis geometry: frame length and hop, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    frame_ms: f64,
    hop_ms: f64,
}

impl FrameSpec {
    pub fn new(frame_ms: f64, hop_ms: f64) -> Result<Self> {
        let positive = frame_ms.is_finite() && frame_ms > 0.0 && hop_ms.is_finite() && hop_ms > 0.0;
        if !positive {
            return Err(Error::invalid("frame_ms and hop_ms must be positive"));
        }
        if hop_ms > frame_ms {
            return Err(Error::invalid(format!(
                "hop_ms ({hop_ms}) must not exceed frame_ms ({frame_ms})"
            )));
        }
        Ok(Self { frame_ms, hop_ms })
    }

    pub fn frame_ms(&self) -> f64 {
        self.frame_ms
    }

    pub fn hop_ms(&self) -> f64 {
        self.hop_ms
    }

    /// Frame length in samples at the given rate.
    pub fn frame_len(&self, sample_rate_hz: u32) -> usize {
        (self.frame_ms * sample_rate_hz as f64 / 1000.0).round() as usize
    }

    /// Hop length in samples at the given rate.
    pub fn hop_len(&self, sample_rate_hz: u32) -> usize {
        (self.hop_ms * sample_rate_hz as f64 / 1000.0).round() as usize
    }
}

impl Default for FrameSpec {
    /// 25 ms frames with a 10 ms shift.
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
        }
    }
}

/// One non-overlapping analysis window with its position in the recording.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub index: usize,
    pub start_sample: usize,
    pub start_ms: f64,
    pub samples: &'a [f64],
}

/// Overlapping frames: starts at 0, H, 2H, ...; the trailing partial frame is
/// dropped, so the count is floor((N - L)/H) + 1 for N >= L and 0 otherwise.
pub fn frames<'a>(buffer: &'a AudioBuffer, spec: &FrameSpec) -> Vec<&'a [f64]> {
    let len = spec.frame_len(buffer.sample_rate_hz);
    let hop = spec.hop_len(buffer.sample_rate_hz);
    frame_slices(&buffer.samples, len, hop)
}

pub(crate) fn frame_slices(samples: &[f64], len: usize, hop: usize) -> Vec<&[f64]> {
    if len == 0 || hop == 0 || samples.len() < len {
        return Vec::new();
    }
    let count = (samples.len() - len) / hop + 1;
    (0..count)
        .map(|k| &samples[k * hop..k * hop + len])
        .collect()
}

/// Consecutive non-overlapping windows of `window_ms`; the trailing partial
/// window is dropped.
pub fn windows(buffer: &AudioBuffer, window_ms: f64) -> Vec<Window<'_>> {
    let sr = buffer.sample_rate_hz;
    let len = (window_ms * sr as f64 / 1000.0).round() as usize;
    if len == 0 {
        return Vec::new();
    }
    buffer
        .samples
        .chunks_exact(len)
        .enumerate()
        .map(|(index, samples)| Window {
            index,
            start_sample: index * len,
            start_ms: (index * len) as f64 * 1000.0 / sr as f64,
            samples,
        })
        .collect()
}

fn open_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::NotFound => Error::AudioMissing {
            path: path.to_path_buf(),
        },
        // hound reports a short read either as UnexpectedEof or as its own
        // "Failed to read enough bytes." io error
        hound::Error::IoError(e)
            if e.kind() == io::ErrorKind::UnexpectedEof
                || e.to_string().contains("enough bytes") =>
        {
            Error::AudioTruncated {
                path: path.to_path_buf(),
            }
        }
        hound::Error::IoError(e) => Error::io(path, e),
        other => Error::AudioUnsupported {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}

/// Decode a linear-PCM WAV file into a normalized mono buffer.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| open_error(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::AudioUnsupported {
            path: path.to_path_buf(),
            detail: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let max_magnitude = (1i64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / max_magnitude))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| open_error(path, e))?
        }
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| open_error(path, e))?,
        (format, bits) => {
            return Err(Error::AudioUnsupported {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?} PCM"),
            });
        }
    };

    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };

    AudioBuffer::new(samples, spec.sample_rate)
}

/// Write a mono buffer as 16-bit PCM WAV. Together with [`load_wav`] this
/// round-trips 16-bit data bit-exactly.
pub fn save_wav_16bit(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| open_error(path, e))?;
    for &s in &buffer.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| open_error(path, e))?;
    }
    writer.finalize().map_err(|e| open_error(path, e))?;
    Ok(())
}
