//! End-to-end oracle for the loudness/ZCR descriptor path: the full
//! window -> frame -> statistics -> averaging pipeline is recomputed here
//! from raw samples with naive loops and the normal-equation slope, then
//! compared entry-by-entry against `prosody_vector`.

mod common;

use common::*;
use speechcues::audio::AudioBuffer;
use speechcues::diarization::SpeechMask;
use speechcues::prosody::{prosody_vector, ProsodyConfig};

fn brute_zcr(frame: &[f64]) -> f64 {
    let mut changes = 0;
    for i in 1..frame.len() {
        if (frame[i - 1] < 0.0) != (frame[i] < 0.0) {
            changes += 1;
        }
    }
    changes as f64 / (frame.len() - 1) as f64
}

fn brute_rms(frame: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &s in frame {
        acc += s * s;
    }
    (acc / frame.len() as f64).sqrt()
}

/// mean, population std, skewness, OLS slope by explicit formulas.
fn brute_stats(series: &[f64]) -> [f64; 4] {
    let n = series.len() as f64;
    let mut sum = 0.0;
    for &x in series {
        sum += x;
    }
    let mean = sum / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in series {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    let std = m2.sqrt();
    let skew = if m2 > 0.0 {
        m3 / (std * std * std)
    } else {
        0.0
    };
    let slope = if series.len() == 1 {
        0.0
    } else {
        let (mut si, mut sii, mut sx, mut six) = (0.0, 0.0, 0.0, 0.0);
        for (i, &x) in series.iter().enumerate() {
            si += i as f64;
            sii += (i * i) as f64;
            sx += x;
            six += i as f64 * x;
        }
        (n * six - si * sx) / (n * sii - si * si)
    };
    [mean, std, skew, slope]
}

fn close(actual: f64, oracle: f64) -> bool {
    (actual - oracle).abs() <= 1e-9 * oracle.abs().max(1.0)
}

/// Recompute the loudness and ZCR parts of the 18-dim vector from scratch.
/// Returns (loudness stats, zcr stats, zcr_min, zcr_max).
fn brute_vector(samples: &[f64], sr: u32) -> ([f64; 4], [f64; 4], f64, f64) {
    let window_len = (0.125 * sr as f64).round() as usize;
    let frame_len = (0.025 * sr as f64).round() as usize;
    let hop = (0.010 * sr as f64).round() as usize;

    let mut loud_acc = [0.0f64; 4];
    let mut zcr_acc = [0.0f64; 4];
    let (mut min_acc, mut max_acc) = (0.0f64, 0.0f64);
    let n_windows = samples.len() / window_len;
    for w in 0..n_windows {
        let window = &samples[w * window_len..(w + 1) * window_len];
        let mut loud_series = Vec::new();
        let mut zcr_series = Vec::new();
        let mut start = 0;
        while start + frame_len <= window.len() {
            let frame = &window[start..start + frame_len];
            loud_series.push(brute_rms(frame));
            zcr_series.push(brute_zcr(frame));
            start += hop;
        }
        for (acc, value) in loud_acc.iter_mut().zip(brute_stats(&loud_series)) {
            *acc += value;
        }
        for (acc, value) in zcr_acc.iter_mut().zip(brute_stats(&zcr_series)) {
            *acc += value;
        }
        min_acc += zcr_series.iter().copied().fold(f64::INFINITY, f64::min);
        max_acc += zcr_series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let n = n_windows as f64;
    for acc in loud_acc.iter_mut().chain(zcr_acc.iter_mut()) {
        *acc /= n;
    }
    (loud_acc, zcr_acc, min_acc / n, max_acc / n)
}

/// Square wave whose switching rate ramps up across each window, so the
/// frame-level ZCR rises roughly linearly within every window.
fn rising_zcr_recording(n_windows: usize, sr: u32) -> Vec<f64> {
    let window_len = (0.125 * sr as f64).round() as usize;
    let window: Vec<f64> = (0..window_len)
        .map(|i| {
            let t = i as f64 / sr as f64;
            let phase = 2.0 * std::f64::consts::PI * (200.0 * t + 0.5 * 9600.0 * t * t);
            if phase.sin() >= 0.0 {
                0.5
            } else {
                -0.5
            }
        })
        .collect();
    window
        .iter()
        .copied()
        .cycle()
        .take(window_len * n_windows)
        .collect()
}

#[test]
fn vector_matches_whole_pipeline_recomputation() {
    let fixtures = [
        rising_zcr_recording(4, SR),
        harmonic(1.0, 140.0, 0.3, 0.7, SR),
        sine(95.0, 0.4, 0.0, 6000, SR),
    ];
    for (i, samples) in fixtures.iter().enumerate() {
        let n_windows = samples.len() / 2000;
        let buffer = AudioBuffer::new(samples.clone(), SR).unwrap();
        let mask = SpeechMask::from_similarities(vec![1.0; n_windows], 0.65, 125.0);
        let vector = prosody_vector(&buffer, &mask, &ProsodyConfig::default()).unwrap();

        let (loud, zcr, zcr_min, zcr_max) = brute_vector(samples, SR);
        let got = [
            vector.loudness.mean,
            vector.loudness.std,
            vector.loudness.skewness,
            vector.loudness.slope,
        ];
        for (a, b) in got.iter().zip(loud) {
            assert!(close(*a, b), "fixture {i} loudness: {a} vs {b}");
        }
        let got = [
            vector.zcr.mean,
            vector.zcr.std,
            vector.zcr.skewness,
            vector.zcr.slope,
        ];
        for (a, b) in got.iter().zip(zcr) {
            assert!(close(*a, b), "fixture {i} zcr: {a} vs {b}");
        }
        assert!(close(vector.zcr_min, zcr_min));
        assert!(close(vector.zcr_max, zcr_max));
    }
}

#[test]
fn rising_zcr_gives_positive_slope() {
    let samples = rising_zcr_recording(4, SR);
    let buffer = AudioBuffer::new(samples.clone(), SR).unwrap();
    let mask = SpeechMask::from_similarities(vec![1.0; 4], 0.65, 125.0);
    let vector = prosody_vector(&buffer, &mask, &ProsodyConfig::default()).unwrap();
    assert!(vector.zcr.slope > 0.0, "slope {}", vector.zcr.slope);
    let (_, zcr_oracle, _, _) = brute_vector(&samples, SR);
    assert!(close(vector.zcr.slope, zcr_oracle[3]));
}
