//! Shared synthesis and fixture helpers for the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use speechcues::audio::{save_wav_16bit, AudioBuffer};
use speechcues::corpus::{metadata_csv_string, VideoRecord};

pub const SR: u32 = 16000;

pub fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

pub fn sine(freq: f64, amplitude: f64, phase: f64, n: usize, sr: u32) -> Vec<f64> {
    (0..n)
        .map(|i| amplitude * (2.0 * PI * freq * i as f64 / sr as f64 + phase).sin())
        .collect()
}

/// Band-limited harmonic source: eight harmonics with 1/k amplitudes,
/// normalized to the requested peak amplitude.
pub fn harmonic(duration_s: f64, f0: f64, phase: f64, amplitude: f64, sr: u32) -> Vec<f64> {
    let n = (duration_s * sr as f64).round() as usize;
    let mut samples = vec![0.0f64; n];
    let mut peak = 0.0f64;
    for (i, s) in samples.iter_mut().enumerate() {
        let t = i as f64 / sr as f64;
        let mut v = 0.0;
        for k in 1..=8 {
            v += (2.0 * PI * f0 * k as f64 * t + phase * k as f64).sin() / k as f64;
        }
        *s = v;
        peak = peak.max(v.abs());
    }
    for s in samples.iter_mut() {
        *s *= amplitude / peak;
    }
    samples
}

/// Deterministic uniform noise in [-amplitude, amplitude].
pub fn noise(n: usize, amplitude: f64, mut state: u64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0) * amplitude
        })
        .collect()
}

/// One 125 ms analysis window of a linear chirp starting at `f0` with the
/// given sweep rate (Hz per second). The rate controls how much the detected
/// pitch period drifts frame-to-frame, i.e. the measured jitter.
pub fn chirp_window(f0: f64, rate_hz_per_s: f64, sr: u32) -> Vec<f64> {
    let n = (0.125 * sr as f64).round() as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / sr as f64;
            0.6 * (2.0 * PI * (f0 * t + 0.5 * rate_hz_per_s * t * t)).sin()
        })
        .collect()
}

/// A recording made of `n_windows` identical chirp windows.
pub fn chirp_recording(f0: f64, rate_hz_per_s: f64, n_windows: usize, sr: u32) -> Vec<f64> {
    let window = chirp_window(f0, rate_hz_per_s, sr);
    window
        .iter()
        .copied()
        .cycle()
        .take(window.len() * n_windows)
        .collect()
}

pub fn write_wav(path: &Path, samples: Vec<f64>, sr: u32) {
    save_wav_16bit(&AudioBuffer::new(samples, sr).unwrap(), path).unwrap();
}

pub fn record(id: &str, title: &str, publish: &str, audio: Option<&str>) -> VideoRecord {
    VideoRecord {
        id: id.into(),
        title: title.into(),
        description: String::new(),
        publish_date: date(publish),
        duration_s: 30.0,
        views: 100,
        upvotes: 5,
        downvotes: 1,
        audio_path: audio.map(PathBuf::from),
    }
}

pub fn write_metadata(path: &Path, records: &[VideoRecord]) {
    std::fs::write(path, metadata_csv_string(records)).unwrap();
}

/// Reference sidecar rows covering the whole of each listed recording.
pub fn write_references(path: &Path, entries: &[(&str, f64, f64)]) {
    let mut body = String::from("id,start_ms,end_ms\n");
    for (id, start, end) in entries {
        body.push_str(&format!("{id},{start},{end}\n"));
    }
    std::fs::write(path, body).unwrap();
}

/// Recursively collect (relative path, bytes) of every file under a root.
pub fn dir_snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn visit(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                visit(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    visit(root, root, &mut out);
    out
}
