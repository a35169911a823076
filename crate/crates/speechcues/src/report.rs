//! Rendering of the pipeline's output artifacts (CSV tables and the
//! alignment JSON) and re-parsing of the feature table.
//!
//! Numbers are written with Rust's shortest round-trip decimal formatting,
//! so regenerated files are byte-stable.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::linguistics::{top_k, WordTable};
use crate::prosody::{ProsodyVector, FEATURE_COLUMNS};
use crate::timeline::{RejectedRecord, TimeBin};
use crate::{Error, Result};

/// Per-stage corpus funnel counts emitted by `scan`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScanReport {
    pub raw: usize,
    pub after_dedupe: usize,
    pub after_date_filter: usize,
    pub after_location_filter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotator_kappa: Option<f64>,
}

/// `id,<18 descriptor columns>` with the documented column order.
pub fn features_csv(rows: &[(String, ProsodyVector)]) -> String {
    let mut out = String::from("id,");
    out.push_str(&FEATURE_COLUMNS.join(","));
    out.push('\n');
    for (id, vector) in rows {
        out.push_str(id);
        for value in vector.to_array() {
            write!(out, ",{value}").expect("string write");
        }
        out.push('\n');
    }
    out
}

/// Parse a feature table produced by [`features_csv`].
pub fn parse_features_csv(path: impl AsRef<Path>) -> Result<Vec<(String, ProsodyVector)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    {
        let headers = reader.headers().map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let expected: Vec<&str> = std::iter::once("id").chain(FEATURE_COLUMNS).collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(Error::invalid(format!(
                "feature table {} has unexpected header {got:?}",
                path.display()
            )));
        }
    }
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::invalid(format!("feature row {}: {e}", i + 1)))?;
        if row.len() != 19 {
            return Err(Error::invalid(format!(
                "feature row {}: expected 19 fields, got {}",
                i + 1,
                row.len()
            )));
        }
        let mut values = [0.0f64; 18];
        for (slot, field) in values.iter_mut().zip(row.iter().skip(1)) {
            *slot = field.parse().map_err(|e| {
                Error::invalid(format!("feature row {}: bad value {field:?}: {e}", i + 1))
            })?;
        }
        rows.push((row[0].to_string(), ProsodyVector::from_array(values)));
    }
    Ok(rows)
}

/// `bin,start_date,n_videos,<18 descriptor columns>`; bins without any
/// feature vector keep their descriptor cells empty.
pub fn weekly_features_csv(bins: &[TimeBin]) -> String {
    let mut out = String::from("bin,start_date,n_videos,");
    out.push_str(&FEATURE_COLUMNS.join(","));
    out.push('\n');
    for bin in bins {
        write!(
            out,
            "{},{},{}",
            bin.index,
            bin.start_date,
            bin.record_ids.len()
        )
        .expect("string write");
        match &bin.mean_vector {
            Some(vector) => {
                for value in vector.to_array() {
                    write!(out, ",{value}").expect("string write");
                }
            }
            None => out.push_str(&",".repeat(18)),
        }
        out.push('\n');
    }
    out
}

fn sorted_entries(table: &WordTable) -> Vec<(String, f64)> {
    top_k(table, usize::MAX)
}

/// Full per-bin tables: `bin,word,frequency`, bins ascending, then
/// frequency descending with the lexicographic tie-break.
pub fn word_tables_csv(bins: &[TimeBin]) -> String {
    let mut out = String::from("bin,word,frequency\n");
    for bin in bins {
        if let Some(table) = &bin.word_table {
            for (word, freq) in sorted_entries(table) {
                writeln!(out, "{},{word},{freq}", bin.index).expect("string write");
            }
        }
    }
    out
}

/// Top-`k` rows per bin in the same format as [`word_tables_csv`].
pub fn top_words_csv(bins: &[TimeBin], k: usize) -> String {
    let mut out = String::from("bin,word,frequency\n");
    for bin in bins {
        if let Some(table) = &bin.word_table {
            for (word, freq) in top_k(table, k) {
                writeln!(out, "{},{word},{freq}", bin.index).expect("string write");
            }
        }
    }
    out
}

/// `bin,value` trajectory table.
pub fn trajectory_csv(values: &[f64]) -> String {
    let mut out = String::from("bin,value\n");
    for (i, value) in values.iter().enumerate() {
        writeln!(out, "{},{value}", i + 1).expect("string write");
    }
    out
}

/// `bin,<series...>` weekly event totals.
pub fn events_weekly_csv(series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("bin");
    for (name, _) in series {
        write!(out, ",{name}").expect("string write");
    }
    out.push('\n');
    let n_bins = series.first().map(|(_, v)| v.len()).unwrap_or(0);
    for bin in 0..n_bins {
        write!(out, "{}", bin + 1).expect("string write");
        for (_, values) in series {
            write!(out, ",{}", values[bin]).expect("string write");
        }
        out.push('\n');
    }
    out
}

/// `id,reason` listing of per-record soft failures.
pub fn skips_csv(skips: &[(String, String)]) -> String {
    let mut out = String::from("id,reason\n");
    for (id, reason) in skips {
        writeln!(out, "{id},{reason}").expect("string write");
    }
    out
}

/// `id,stage` listing of records dropped by the scan funnel.
pub fn scan_rejects_csv(rejects: &[(String, String)]) -> String {
    let mut out = String::from("id,stage\n");
    for (id, stage) in rejects {
        writeln!(out, "{id},{stage}").expect("string write");
    }
    out
}

/// `id,publish_date` listing of records outside the configured date grid.
pub fn binning_rejects_csv(rejects: &[RejectedRecord]) -> String {
    let mut out = String::from("id,publish_date\n");
    for r in rejects {
        writeln!(out, "{},{}", r.id, r.publish_date).expect("string write");
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linguistics::word_freq;
    use crate::prosody::DescriptorStats;
    use chrono::NaiveDate;

    fn vector(seed: f64) -> ProsodyVector {
        let mut values = [0.0f64; 18];
        for (i, v) in values.iter_mut().enumerate() {
            *v = seed + i as f64 * 0.5;
        }
        ProsodyVector::from_array(values)
    }

    #[test]
    fn features_csv_round_trips() {
        let rows = vec![
            ("v1".to_string(), vector(0.25)),
            ("v2".to_string(), vector(-3.5)),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        std::fs::write(&path, features_csv(&rows)).unwrap();
        let parsed = parse_features_csv(&path).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn parse_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        std::fs::write(&path, "id,loudness_mean\nv1,0.5\n").unwrap();
        assert!(parse_features_csv(&path).is_err());
    }

    #[test]
    fn weekly_csv_leaves_missing_bins_empty() {
        let date = NaiveDate::from_ymd_opt(2020, 3, 13).unwrap();
        let bins = vec![
            TimeBin {
                index: 1,
                start_date: date,
                record_ids: vec!["a".into(), "b".into()],
                mean_vector: Some(ProsodyVector {
                    loudness: DescriptorStats {
                        mean: 0.5,
                        ..Default::default()
                    },
                    zcr: DescriptorStats::default(),
                    jitter: DescriptorStats::default(),
                    shimmer: DescriptorStats::default(),
                    zcr_min: 0.0,
                    zcr_max: 0.0,
                }),
                word_table: None,
            },
            TimeBin {
                index: 2,
                start_date: date + chrono::Duration::days(7),
                record_ids: vec![],
                mean_vector: None,
                word_table: None,
            },
        ];
        let csv = weekly_features_csv(&bins);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[1].starts_with("1,2020-03-13,2,0.5,0,"));
        assert_eq!(lines[2], format!("2,2020-03-20,0{}", ",".repeat(18)));
    }

    #[test]
    fn word_csv_ordering() {
        let record = crate::corpus::VideoRecord {
            id: "x".into(),
            title: "b b a a c".into(),
            description: String::new(),
            publish_date: NaiveDate::from_ymd_opt(2020, 3, 14).unwrap(),
            duration_s: 1.0,
            views: 0,
            upvotes: 0,
            downvotes: 0,
            audio_path: None,
        };
        let table = word_freq(&[&record], &Default::default()).unwrap();
        let bins = vec![TimeBin {
            index: 1,
            start_date: NaiveDate::from_ymd_opt(2020, 3, 13).unwrap(),
            record_ids: vec!["x".into()],
            mean_vector: None,
            word_table: Some(table),
        }];
        assert_eq!(
            word_tables_csv(&bins),
            "bin,word,frequency\n1,a,2\n1,b,2\n1,c,1\n"
        );
        assert_eq!(
            top_words_csv(&bins, 2),
            "bin,word,frequency\n1,a,2\n1,b,2\n"
        );
    }
}
