//! Orchestration behind the CLI subcommands: `scan`, `extract`, `words`,
//! `report`.
//!
//! Every command validates and parses all of its inputs before writing
//! anything, and every output file is written atomically
//! (write-temp-then-rename), so a failed run never corrupts previous
//! outputs. Per-record problems during extraction are soft failures
//! collected into a skip report; they never abort the run.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::audio::load_wav;
use crate::config::PipelineConfig;
use crate::corpus::{
    self, cohens_kappa, metadata_csv_string, read_annotations_csv, read_metadata_csv, VideoRecord,
};
use crate::diarization::{
    diarize_with_embeddings, load_external_embeddings, EmbeddingOverrides, ReferenceSegment,
    SpeechMask,
};
use crate::linguistics::{load_stopwords, target_trajectory, word_freq, WordTable};
use crate::prosody::{prosody_vector, ProsodyVector, FEATURE_COLUMNS};
use crate::report::{
    binning_rejects_csv, events_weekly_csv, features_csv, parse_features_csv, scan_rejects_csv,
    skips_csv, to_json_pretty, top_words_csv, trajectory_csv, weekly_features_csv, word_tables_csv,
    ScanReport,
};
use crate::timeline::{
    align_report, assign_bins, detect_peaks, load_bin_boundaries, load_event_series,
    weekly_aggregate, Aggregation, AlignmentReport, BinAssignment, Binning, PeakSet,
};
use crate::{Error, Result};

pub const FILTERED_METADATA_FILE: &str = "filtered.csv";
pub const SCAN_REPORT_FILE: &str = "scan_report.json";
pub const SCAN_REJECTS_FILE: &str = "scan_rejects.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const EXTRACT_SKIPS_FILE: &str = "extract_skips.csv";
pub const MASKS_DIR: &str = "masks";
pub const WORD_TABLES_FILE: &str = "word_tables.csv";
pub const TOP_WORDS_FILE: &str = "top_words.csv";
pub const TARGET_TRAJECTORY_FILE: &str = "target_trajectory.csv";
pub const WEEKLY_FEATURES_FILE: &str = "weekly_features.csv";
pub const EVENTS_WEEKLY_FILE: &str = "events_weekly.csv";
pub const ALIGNMENT_FILE: &str = "alignment.json";
pub const BINNING_REJECTS_FILE: &str = "binning_rejects.csv";

/// Write-temp-then-rename within the target directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a PathBuf> {
    path.as_ref()
        .ok_or_else(|| Error::Config(format!("missing required config key `{key}`")))
}

fn binning_from(cfg: &PipelineConfig) -> Result<Binning> {
    match &cfg.bin_overrides {
        Some(path) => Binning::explicit(load_bin_boundaries(path)?, cfg.end),
        None => Binning::uniform(cfg.anchor, cfg.end, cfg.width_days),
    }
}

fn stopwords_from(cfg: &PipelineConfig) -> Result<HashSet<String>> {
    match &cfg.stopwords {
        Some(path) => load_stopwords(path),
        None => Ok(HashSet::new()),
    }
}

#[derive(Debug)]
pub struct ScanOutcome {
    pub report: ScanReport,
    pub kept: Vec<VideoRecord>,
}

/// dedupe -> date filter -> location filter; writes the filtered metadata,
/// the per-stage funnel counts, and the per-record reject listing.
pub fn run_scan(cfg: &PipelineConfig) -> Result<ScanOutcome> {
    let metadata = require(&cfg.metadata, "metadata")?;
    let raw = read_metadata_csv(metadata)?;
    let mut rejects: Vec<(String, String)> = Vec::new();

    let mut seen = HashSet::new();
    for record in &raw {
        if !seen.insert(record.id.clone()) {
            rejects.push((record.id.clone(), "duplicate".into()));
        }
    }
    let deduped = corpus::dedupe(raw.clone());

    let dated = corpus::filter_date_range(deduped.clone(), cfg.anchor, cfg.end)?;
    let dated_ids: HashSet<&str> = dated.iter().map(|r| r.id.as_str()).collect();
    for record in &deduped {
        if !dated_ids.contains(record.id.as_str()) {
            rejects.push((record.id.clone(), "date_out_of_range".into()));
        }
    }

    let located = corpus::filter_location(
        dated.clone(),
        &cfg.location_tokens,
        &cfg.location_substrings,
    )?;
    let located_ids: HashSet<&str> = located.iter().map(|r| r.id.as_str()).collect();
    for record in &dated {
        if !located_ids.contains(record.id.as_str()) {
            rejects.push((record.id.clone(), "no_location_keyword".into()));
        }
    }

    let annotator_kappa = match &cfg.annotations {
        Some(path) => Some(cohens_kappa(&read_annotations_csv(path)?)),
        None => None,
    };

    let report = ScanReport {
        raw: raw.len(),
        after_dedupe: deduped.len(),
        after_date_filter: dated.len(),
        after_location_filter: located.len(),
        annotator_kappa,
    };

    write_atomic(
        &cfg.out_dir.join(FILTERED_METADATA_FILE),
        &metadata_csv_string(&located),
    )?;
    write_atomic(
        &cfg.out_dir.join(SCAN_REPORT_FILE),
        &to_json_pretty(&report),
    )?;
    write_atomic(
        &cfg.out_dir.join(SCAN_REJECTS_FILE),
        &scan_rejects_csv(&rejects),
    )?;

    Ok(ScanOutcome {
        report,
        kept: located,
    })
}

/// Reference sidecar: CSV `id,start_ms,end_ms`.
pub fn read_references_csv(path: impl AsRef<Path>) -> Result<HashMap<String, (f64, f64)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let mut map = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::invalid(format!("reference row {}: {e}", i + 1)))?;
        if row.len() != 3 {
            return Err(Error::invalid(format!(
                "reference row {}: expected id,start_ms,end_ms",
                i + 1
            )));
        }
        let start: f64 = row[1]
            .trim()
            .parse()
            .map_err(|e| Error::invalid(format!("reference row {}: bad start_ms: {e}", i + 1)))?;
        let end: f64 = row[2]
            .trim()
            .parse()
            .map_err(|e| Error::invalid(format!("reference row {}: bad end_ms: {e}", i + 1)))?;
        map.insert(row[0].to_string(), (start, end));
    }
    Ok(map)
}

enum Processed {
    Row {
        vector: ProsodyVector,
        mask: SpeechMask,
    },
    Skip {
        reason: String,
        mask: Option<SpeechMask>,
    },
}

fn process_record(
    record: &VideoRecord,
    references: &HashMap<String, (f64, f64)>,
    audio_root: &Path,
    cfg: &PipelineConfig,
) -> Processed {
    let skip = |reason: String| Processed::Skip { reason, mask: None };

    let Some(relative) = &record.audio_path else {
        return skip("no audio path".into());
    };
    let path = if relative.is_absolute() {
        relative.clone()
    } else {
        audio_root.join(relative)
    };
    let buffer = match load_wav(&path) {
        Ok(buffer) => buffer,
        Err(Error::AudioMissing { .. }) => return skip("audio file missing".into()),
        Err(e) => return skip(format!("decode error: {e}")),
    };

    let Some(&(start_ms, end_ms)) = references.get(&record.id) else {
        return skip("no reference segment".into());
    };
    let sr = buffer.sample_rate_hz as f64;
    let start = (start_ms / 1000.0 * sr).round() as usize;
    let end = (end_ms / 1000.0 * sr).round() as usize;
    let reference = match buffer
        .slice(start, end.min(buffer.len()).max(start))
        .and_then(ReferenceSegment::new)
    {
        Ok(reference) => reference,
        Err(e) => return skip(format!("invalid reference: {e}")),
    };

    let overrides = match &cfg.embeddings_dir {
        Some(dir) => {
            let path = dir.join(format!("{}.emb", record.id));
            if path.exists() {
                match load_external_embeddings(&path) {
                    Ok(overrides) => overrides,
                    Err(e) => return skip(format!("bad embeddings: {e}")),
                }
            } else {
                EmbeddingOverrides::default()
            }
        }
        None => EmbeddingOverrides::default(),
    };

    let mask = match diarize_with_embeddings(&buffer, &reference, &cfg.diarization(), &overrides) {
        Ok(mask) => mask,
        Err(Error::NoAnalyzableAudio) => return skip("no analyzable audio".into()),
        Err(e) => return skip(format!("diarization failed: {e}")),
    };

    match prosody_vector(&buffer, &mask, &cfg.prosody()) {
        Ok(vector) => Processed::Row { vector, mask },
        Err(Error::NoSpeechRetained) => Processed::Skip {
            reason: "no speech retained".into(),
            mask: Some(mask),
        },
        Err(e) => Processed::Skip {
            reason: format!("feature extraction failed: {e}"),
            mask: Some(mask),
        },
    }
}

#[derive(Debug)]
pub struct ExtractOutcome {
    pub rows: Vec<(String, ProsodyVector)>,
    pub skips: Vec<(String, String)>,
}

/// Diarize and extract the 18-dimensional descriptor for every recording.
/// Work is distributed over `workers` threads; results are merged in input
/// order, so the outputs are identical for any worker count.
pub fn run_extract(cfg: &PipelineConfig) -> Result<ExtractOutcome> {
    let metadata = require(&cfg.metadata, "metadata")?;
    let references_path = require(&cfg.references, "references")?;
    let records = read_metadata_csv(metadata)?;
    let references = read_references_csv(references_path)?;
    let audio_root = cfg.audio_root.clone().unwrap_or_else(|| PathBuf::from("."));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let processed: Vec<Processed> = pool.install(|| {
        records
            .par_iter()
            .map(|record| process_record(record, &references, &audio_root, cfg))
            .collect()
    });

    let mut rows = Vec::new();
    let mut skips = Vec::new();
    let mut masks: Vec<(String, SpeechMask)> = Vec::new();
    for (record, outcome) in records.iter().zip(processed) {
        match outcome {
            Processed::Row { vector, mask } => {
                rows.push((record.id.clone(), vector));
                masks.push((record.id.clone(), mask));
            }
            Processed::Skip { reason, mask } => {
                skips.push((record.id.clone(), reason));
                if let Some(mask) = mask {
                    masks.push((record.id.clone(), mask));
                }
            }
        }
    }

    write_atomic(&cfg.out_dir.join(FEATURES_FILE), &features_csv(&rows))?;
    write_atomic(&cfg.out_dir.join(EXTRACT_SKIPS_FILE), &skips_csv(&skips))?;
    if cfg.emit_masks {
        for (id, mask) in &masks {
            write_atomic(
                &cfg.out_dir.join(MASKS_DIR).join(format!("{id}.csv")),
                &mask.to_csv(),
            )?;
        }
    }

    Ok(ExtractOutcome { rows, skips })
}

/// Group records into bins and attach per-bin word tables.
fn binned_with_words(
    records: &[VideoRecord],
    binning: &Binning,
    stopwords: &HashSet<String>,
) -> Result<BinAssignment> {
    let by_id: HashMap<&str, &VideoRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut assignment = assign_bins(records, binning);
    for bin in &mut assignment.bins {
        if bin.record_ids.is_empty() {
            continue;
        }
        let members: Vec<&VideoRecord> =
            bin.record_ids.iter().map(|id| by_id[id.as_str()]).collect();
        bin.word_table = Some(word_freq(&members, stopwords)?);
    }
    Ok(assignment)
}

fn bin_word_tables(assignment: &BinAssignment) -> Vec<Option<WordTable>> {
    assignment
        .bins
        .iter()
        .map(|bin| bin.word_table.clone())
        .collect()
}

/// Per-bin word tables, the top-k table, and the target-word trajectory.
pub fn run_words(cfg: &PipelineConfig) -> Result<()> {
    let metadata = require(&cfg.metadata, "metadata")?;
    let records = read_metadata_csv(metadata)?;
    let binning = binning_from(cfg)?;
    let stopwords = stopwords_from(cfg)?;
    let assignment = binned_with_words(&records, &binning, &stopwords)?;
    let trajectory = target_trajectory(&bin_word_tables(&assignment), &cfg.target_words);

    write_atomic(
        &cfg.out_dir.join(WORD_TABLES_FILE),
        &word_tables_csv(&assignment.bins),
    )?;
    write_atomic(
        &cfg.out_dir.join(TOP_WORDS_FILE),
        &top_words_csv(&assignment.bins, cfg.top_words),
    )?;
    write_atomic(
        &cfg.out_dir.join(TARGET_TRAJECTORY_FILE),
        &trajectory_csv(&trajectory),
    )?;
    write_atomic(
        &cfg.out_dir.join(BINNING_REJECTS_FILE),
        &binning_rejects_csv(&assignment.rejects),
    )?;
    Ok(())
}

#[derive(Debug)]
pub struct ReportOutcome {
    pub alignment: AlignmentReport,
}

/// Weekly feature table, word tables, trajectories, event totals, peak sets,
/// and the peak-alignment report.
pub fn run_report(cfg: &PipelineConfig) -> Result<ReportOutcome> {
    // parse every input before writing any output
    let metadata = require(&cfg.metadata, "metadata")?;
    let events_path = require(&cfg.events, "events")?;
    let records = read_metadata_csv(metadata)?;
    let features = parse_features_csv(cfg.features_path())?;
    let event_series = load_event_series(events_path)?;
    let binning = binning_from(cfg)?;
    let stopwords = stopwords_from(cfg)?;

    let known_ids: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    if let Some((id, _)) = features
        .iter()
        .find(|(id, _)| !known_ids.contains(id.as_str()))
    {
        return Err(Error::GridMismatch(format!(
            "feature table contains id {id:?} absent from the metadata"
        )));
    }

    let mut assignment = binned_with_words(&records, &binning, &stopwords)?;
    let by_id: HashMap<&str, &ProsodyVector> =
        features.iter().map(|(id, v)| (id.as_str(), v)).collect();
    for bin in &mut assignment.bins {
        let vectors: Vec<ProsodyVector> = bin
            .record_ids
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).map(|&v| v.clone()))
            .collect();
        bin.mean_vector = crate::timeline::bin_average(&vectors);
    }

    let n_bins = binning.n_bins();
    let trajectory = target_trajectory(&bin_word_tables(&assignment), &cfg.target_words);
    let event_totals: Vec<(String, Vec<f64>)> = event_series
        .iter()
        .map(|s| {
            (
                s.name.clone(),
                weekly_aggregate(s, &binning, Aggregation::Sum),
            )
        })
        .collect();

    let mut diagnostics = Vec::new();
    let mut feature_peaks: Vec<PeakSet> = Vec::new();
    let mut event_peaks: Vec<PeakSet> = Vec::new();
    if n_bins < 3 {
        diagnostics.push(format!(
            "peak detection skipped: {n_bins} bins is fewer than 3"
        ));
    } else {
        let missing: Vec<usize> = assignment
            .bins
            .iter()
            .filter(|b| b.mean_vector.is_none())
            .map(|b| b.index)
            .collect();
        if missing.is_empty() {
            for (i, name) in FEATURE_COLUMNS.iter().enumerate() {
                let values: Vec<f64> = assignment
                    .bins
                    .iter()
                    .map(|b| b.mean_vector.as_ref().expect("no missing bins").to_array()[i])
                    .collect();
                feature_peaks.push(detect_peaks(*name, &values)?);
            }
        } else {
            diagnostics.push(format!(
                "feature peak detection skipped: bins {missing:?} have no feature vector"
            ));
        }
        feature_peaks.push(detect_peaks("target_words", &trajectory)?);
        for (name, totals) in &event_totals {
            event_peaks.push(detect_peaks(name.clone(), totals)?);
        }
    }

    let mut alignment = align_report(&feature_peaks, &event_peaks, cfg.tolerance_bins, n_bins)?;
    alignment.diagnostics = diagnostics;

    write_atomic(
        &cfg.out_dir.join(WEEKLY_FEATURES_FILE),
        &weekly_features_csv(&assignment.bins),
    )?;
    write_atomic(
        &cfg.out_dir.join(EVENTS_WEEKLY_FILE),
        &events_weekly_csv(&event_totals),
    )?;
    write_atomic(
        &cfg.out_dir.join(TOP_WORDS_FILE),
        &top_words_csv(&assignment.bins, cfg.top_words),
    )?;
    write_atomic(
        &cfg.out_dir.join(TARGET_TRAJECTORY_FILE),
        &trajectory_csv(&trajectory),
    )?;
    write_atomic(
        &cfg.out_dir.join(ALIGNMENT_FILE),
        &to_json_pretty(&alignment),
    )?;
    write_atomic(
        &cfg.out_dir.join(BINNING_REJECTS_FILE),
        &binning_rejects_csv(&assignment.rejects),
    )?;

    Ok(ReportOutcome { alignment })
}
