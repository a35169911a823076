//! Recording metadata: loading, validation, deduplication, date/location
//! filtering, search-query generation, and annotator agreement.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::{Error, Result};

/// Metadata for one corpus item.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub id: String,
    pub title: String,
    pub description: String,
    pub publish_date: NaiveDate,
    pub duration_s: f64,
    pub views: u64,
    pub upvotes: u64,
    pub downvotes: u64,
    pub audio_path: Option<PathBuf>,
}

impl VideoRecord {
    fn validate(&self, row: usize) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::MetadataLoad {
                row,
                detail: "id must be nonempty".into(),
            });
        }
        if self.duration_s.is_nan() || self.duration_s < 0.0 {
            return Err(Error::MetadataLoad {
                row,
                detail: format!("duration_s must be nonnegative, got {}", self.duration_s),
            });
        }
        Ok(())
    }
}

/// The keyword grid search queries are generated from.
#[derive(Debug, Clone)]
pub struct QueryGrid {
    pub events: Vec<String>,
    pub behaviors: Vec<String>,
    pub locations: Vec<String>,
}

/// The full Cartesian product of the grid, each query as
/// `"<event> <behavior> <location>"`.
pub fn generate_queries(grid: &QueryGrid) -> Result<Vec<String>> {
    if grid.events.is_empty() || grid.behaviors.is_empty() || grid.locations.is_empty() {
        return Err(Error::invalid("query grid components must all be nonempty"));
    }
    let mut queries =
        Vec::with_capacity(grid.events.len() * grid.behaviors.len() * grid.locations.len());
    for event in &grid.events {
        for behavior in &grid.behaviors {
            for location in &grid.locations {
                queries.push(format!("{event} {behavior} {location}"));
            }
        }
    }
    Ok(queries)
}

/// Keep the first occurrence of each id, preserving input order.
pub fn dedupe(records: Vec<VideoRecord>) -> Vec<VideoRecord> {
    let mut seen = HashSet::new();
    records
        .into_iter()
        .filter(|r| seen.insert(r.id.clone()))
        .collect()
}

/// Keep records with `start <= publish_date <= end` (inclusive both ends).
pub fn filter_date_range(
    records: Vec<VideoRecord>,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<VideoRecord>> {
    if start > end {
        return Err(Error::invalid(format!(
            "date range start {start} is after end {end}"
        )));
    }
    Ok(records
        .into_iter()
        .filter(|r| start <= r.publish_date && r.publish_date <= end)
        .collect())
}

fn token_match(text: &str, token: &str) -> bool {
    text.split(|c: char| !c.is_alphanumeric())
        .any(|t| !t.is_empty() && t == token)
}

fn substring_match(text_lower: &str, needle_lower: &str) -> bool {
    text_lower.contains(needle_lower)
}

/// Keep records whose title or description mentions a location keyword.
///
/// `exact_tokens` (e.g. "NY", "NYC") match case-sensitively against
/// whitespace/punctuation-delimited tokens, so "anywhere" never matches "NY".
/// `substrings` (e.g. "New York") match case-insensitively anywhere in the
/// text.
pub fn filter_location(
    records: Vec<VideoRecord>,
    exact_tokens: &[String],
    substrings: &[String],
) -> Result<Vec<VideoRecord>> {
    if exact_tokens.is_empty() && substrings.is_empty() {
        return Err(Error::invalid("at least one location keyword is required"));
    }
    let needles: Vec<String> = substrings.iter().map(|s| s.to_lowercase()).collect();
    Ok(records
        .into_iter()
        .filter(|r| {
            let fields = [r.title.as_str(), r.description.as_str()];
            let token_hit = fields
                .iter()
                .any(|text| exact_tokens.iter().any(|tok| token_match(text, tok)));
            if token_hit {
                return true;
            }
            fields.iter().any(|text| {
                let lower = text.to_lowercase();
                needles.iter().any(|n| substring_match(&lower, n))
            })
        })
        .collect())
}

/// Two equal-length categorical label sequences from independent annotators.
#[derive(Debug, Clone)]
pub struct AnnotationPair {
    labels_a: Vec<String>,
    labels_b: Vec<String>,
}

impl AnnotationPair {
    pub fn new(labels_a: Vec<String>, labels_b: Vec<String>) -> Result<Self> {
        if labels_a.len() != labels_b.len() {
            return Err(Error::invalid(format!(
                "label sequences differ in length: {} vs {}",
                labels_a.len(),
                labels_b.len()
            )));
        }
        if labels_a.is_empty() {
            return Err(Error::invalid("label sequences must be nonempty"));
        }
        Ok(Self { labels_a, labels_b })
    }

    pub fn len(&self) -> usize {
        self.labels_a.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced nonempty at construction
    }

    pub fn labels_a(&self) -> &[String] {
        &self.labels_a
    }

    pub fn labels_b(&self) -> &[String] {
        &self.labels_b
    }
}

/// Cohen's kappa: (p_o - p_e) / (1 - p_e), with chance agreement p_e from the
/// per-annotator marginal label distributions over the full label alphabet
/// observed in either sequence. Returns exactly 1 for p_o = p_e = 1.
pub fn cohens_kappa(pair: &AnnotationPair) -> f64 {
    let n = pair.len() as f64;
    let mut count_a: HashMap<&str, f64> = HashMap::new();
    let mut count_b: HashMap<&str, f64> = HashMap::new();
    let mut agree = 0.0;
    for (a, b) in pair.labels_a.iter().zip(&pair.labels_b) {
        *count_a.entry(a.as_str()).or_default() += 1.0;
        *count_b.entry(b.as_str()).or_default() += 1.0;
        if a == b {
            agree += 1.0;
        }
    }
    let p_o = agree / n;
    let alphabet: BTreeSet<&str> = count_a.keys().chain(count_b.keys()).copied().collect();
    let p_e: f64 = alphabet
        .iter()
        .map(|label| {
            let pa = count_a.get(label).copied().unwrap_or(0.0) / n;
            let pb = count_b.get(label).copied().unwrap_or(0.0) / n;
            pa * pb
        })
        .sum();
    if p_e >= 1.0 {
        // p_e = 1 forces both marginals onto the same single label, hence
        // p_o = 1 as well.
        return 1.0;
    }
    (p_o - p_e) / (1.0 - p_e)
}

/// Header of the metadata CSV interchange format.
pub const METADATA_HEADER: [&str; 9] = [
    "id",
    "title",
    "description",
    "publish_date",
    "duration_s",
    "views",
    "upvotes",
    "downvotes",
    "audio_path",
];

fn parse_field<T: std::str::FromStr>(row: usize, name: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| Error::MetadataLoad {
        row,
        detail: format!("bad {name} {value:?}: {e}"),
    })
}

/// Read the metadata CSV (header required). Row numbers in errors are
/// 1-based data rows, excluding the header.
pub fn read_metadata_csv(path: impl AsRef<Path>) -> Result<Vec<VideoRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::MetadataLoad {
            row: row_no,
            detail: e.to_string(),
        })?;
        if row.len() != METADATA_HEADER.len() {
            return Err(Error::MetadataLoad {
                row: row_no,
                detail: format!(
                    "expected {} fields, got {}",
                    METADATA_HEADER.len(),
                    row.len()
                ),
            });
        }
        let publish_date = NaiveDate::parse_from_str(row[3].trim(), "%Y-%m-%d").map_err(|e| {
            Error::MetadataLoad {
                row: row_no,
                detail: format!("bad publish_date {:?}: {e}", &row[3]),
            }
        })?;
        let audio_path = match row[8].trim() {
            "" => None,
            p => Some(PathBuf::from(p)),
        };
        let record = VideoRecord {
            id: row[0].to_string(),
            title: row[1].to_string(),
            description: row[2].to_string(),
            publish_date,
            duration_s: parse_field(row_no, "duration_s", &row[4])?,
            views: parse_field(row_no, "views", &row[5])?,
            upvotes: parse_field(row_no, "upvotes", &row[6])?,
            downvotes: parse_field(row_no, "downvotes", &row[7])?,
            audio_path,
        };
        record.validate(row_no)?;
        records.push(record);
    }
    Ok(records)
}

/// Serialize records in the metadata CSV interchange format.
pub fn metadata_csv_string(records: &[VideoRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(METADATA_HEADER)
        .expect("in-memory write");
    for r in records {
        writer
            .write_record([
                r.id.as_str(),
                r.title.as_str(),
                r.description.as_str(),
                &r.publish_date.format("%Y-%m-%d").to_string(),
                &r.duration_s.to_string(),
                &r.views.to_string(),
                &r.upvotes.to_string(),
                &r.downvotes.to_string(),
                &r.audio_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8 csv")
}

/// Read an annotation file `id,label_a,label_b` into a label pair.
pub fn read_annotations_csv(path: impl AsRef<Path>) -> Result<AnnotationPair> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let mut labels_a = Vec::new();
    let mut labels_b = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::MetadataLoad {
            row: i + 1,
            detail: e.to_string(),
        })?;
        if row.len() != 3 {
            return Err(Error::MetadataLoad {
                row: i + 1,
                detail: format!("expected 3 fields (id,label_a,label_b), got {}", row.len()),
            });
        }
        labels_a.push(row[1].to_string());
        labels_b.push(row[2].to_string());
    }
    AnnotationPair::new(labels_a, labels_b)
}
