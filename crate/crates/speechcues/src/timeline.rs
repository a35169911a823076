//! Fixed-width date binning, per-bin averaging, daily event-series
//! ingestion, peak detection, and peak alignment.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::Serialize;

use crate::corpus::VideoRecord;
use crate::linguistics::WordTable;
use crate::prosody::ProsodyVector;
use crate::{Error, Result};

/// Bin layout over a date range. Bins are 1-based.
///
/// The uniform layout covers [anchor, end] with consecutive `width_days`
/// bins. The explicit layout takes verbatim per-bin start dates (an override
/// file), each bin running to the next start and the last to `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binning {
    Uniform {
        anchor: NaiveDate,
        end: NaiveDate,
        width_days: u32,
    },
    Explicit {
        starts: Vec<NaiveDate>,
        end: NaiveDate,
    },
}

impl Binning {
    pub fn uniform(anchor: NaiveDate, end: NaiveDate, width_days: u32) -> Result<Self> {
        if anchor > end {
            return Err(Error::invalid(format!(
                "anchor {anchor} is after end {end}"
            )));
        }
        if width_days == 0 {
            return Err(Error::invalid("bin width must be at least one day"));
        }
        Ok(Binning::Uniform {
            anchor,
            end,
            width_days,
        })
    }

    pub fn explicit(starts: Vec<NaiveDate>, end: NaiveDate) -> Result<Self> {
        if starts.is_empty() {
            return Err(Error::invalid(
                "explicit binning needs at least one start date",
            ));
        }
        if !starts.windows(2).all(|pair| pair[0] < pair[1]) {
            return Err(Error::invalid(
                "bin start dates must be strictly increasing",
            ));
        }
        if *starts.last().expect("nonempty") > end {
            return Err(Error::invalid(format!(
                "last bin start {} is after end {end}",
                starts.last().expect("nonempty")
            )));
        }
        Ok(Binning::Explicit { starts, end })
    }

    pub fn n_bins(&self) -> usize {
        match self {
            Binning::Uniform {
                anchor,
                end,
                width_days,
            } => {
                let days = (*end - *anchor).num_days() as u64 + 1;
                days.div_ceil(*width_days as u64) as usize
            }
            Binning::Explicit { starts, .. } => starts.len(),
        }
    }

    pub fn end(&self) -> NaiveDate {
        match self {
            Binning::Uniform { end, .. } | Binning::Explicit { end, .. } => *end,
        }
    }

    /// 1-based bin index of a date, or `None` outside the covered range.
    pub fn bin_of(&self, date: NaiveDate) -> Option<usize> {
        match self {
            Binning::Uniform {
                anchor,
                end,
                width_days,
            } => {
                if date < *anchor || date > *end {
                    return None;
                }
                let offset = (date - *anchor).num_days() as u64;
                Some((offset / *width_days as u64) as usize + 1)
            }
            Binning::Explicit { starts, end } => {
                if date < starts[0] || date > *end {
                    return None;
                }
                Some(starts.partition_point(|s| *s <= date))
            }
        }
    }

    /// Start date of a 1-based bin index.
    pub fn start_of(&self, index: usize) -> NaiveDate {
        match self {
            Binning::Uniform {
                anchor, width_days, ..
            } => *anchor + Duration::days(((index - 1) as u32 * width_days) as i64),
            Binning::Explicit { starts, .. } => starts[index - 1],
        }
    }
}

/// One aggregation bin.
#[derive(Debug, Clone)]
pub struct TimeBin {
    pub index: usize,
    pub start_date: NaiveDate,
    pub record_ids: Vec<String>,
    pub mean_vector: Option<ProsodyVector>,
    pub word_table: Option<WordTable>,
}

/// A record whose publish date falls outside the covered range; reported,
/// never silently dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRecord {
    pub id: String,
    pub publish_date: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct BinAssignment {
    pub bins: Vec<TimeBin>,
    pub rejects: Vec<RejectedRecord>,
}

/// Partition records over the bin layout; out-of-range records land in the
/// rejects report.
pub fn assign_bins(records: &[VideoRecord], binning: &Binning) -> BinAssignment {
    let mut bins: Vec<TimeBin> = (1..=binning.n_bins())
        .map(|index| TimeBin {
            index,
            start_date: binning.start_of(index),
            record_ids: Vec::new(),
            mean_vector: None,
            word_table: None,
        })
        .collect();
    let mut rejects = Vec::new();
    for record in records {
        match binning.bin_of(record.publish_date) {
            Some(bin) => bins[bin - 1].record_ids.push(record.id.clone()),
            None => rejects.push(RejectedRecord {
                id: record.id.clone(),
                publish_date: record.publish_date,
            }),
        }
    }
    BinAssignment { bins, rejects }
}

/// Componentwise mean of the bin's vectors; `None` (missing, never
/// zero-filled) for an empty bin.
pub fn bin_average(vectors: &[ProsodyVector]) -> Option<ProsodyVector> {
    ProsodyVector::mean_of(vectors)
}

/// A named daily count series.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    pub name: String,
    pub values: BTreeMap<NaiveDate, u64>,
}

/// Column names of the daily event CSV, which are also the series names.
pub const EVENT_SERIES_NAMES: [&str; 3] = ["new_cases", "new_deaths", "hospitalized"];

/// Load the daily event CSV `date,new_cases,new_deaths,hospitalized`.
/// Rows may arrive unsorted (they are canonicalized by date); duplicate
/// dates, malformed dates, and negative counts are errors naming the row.
pub fn load_event_series(path: impl AsRef<Path>) -> Result<Vec<EventSeries>> {
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
        let expected = ["date", "new_cases", "new_deaths", "hospitalized"];
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected {
            return Err(Error::EventLoad {
                row: 0,
                detail: format!("expected header {expected:?}, got {got:?}"),
            });
        }
    }

    let mut series: Vec<EventSeries> = EVENT_SERIES_NAMES
        .iter()
        .map(|name| EventSeries {
            name: name.to_string(),
            values: BTreeMap::new(),
        })
        .collect();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::EventLoad {
            row: row_no,
            detail: e.to_string(),
        })?;
        if row.len() != 4 {
            return Err(Error::EventLoad {
                row: row_no,
                detail: format!("expected 4 fields, got {}", row.len()),
            });
        }
        let date =
            NaiveDate::parse_from_str(row[0].trim(), "%Y-%m-%d").map_err(|e| Error::EventLoad {
                row: row_no,
                detail: format!("bad date {:?}: {e}", &row[0]),
            })?;
        for (column, target) in row.iter().skip(1).zip(series.iter_mut()) {
            let count: i64 = column.trim().parse().map_err(|e| Error::EventLoad {
                row: row_no,
                detail: format!("bad count {column:?} for {}: {e}", target.name),
            })?;
            if count < 0 {
                return Err(Error::EventLoad {
                    row: row_no,
                    detail: format!("negative count {count} for {}", target.name),
                });
            }
            if target.values.insert(date, count as u64).is_some() {
                return Err(Error::EventLoad {
                    row: row_no,
                    detail: format!("duplicate date {date}"),
                });
            }
        }
    }
    Ok(series)
}

/// How daily values combine into a bin value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Sum of daily counts (counts are additive).
    #[default]
    Sum,
    /// Mean of the bin's present daily values, for rate-like series.
    Mean,
}

/// Aggregate a daily series onto the bin grid; dates outside the covered
/// range are ignored, so the bin totals conserve the in-range mass.
pub fn weekly_aggregate(series: &EventSeries, binning: &Binning, agg: Aggregation) -> Vec<f64> {
    let mut totals = vec![0.0f64; binning.n_bins()];
    let mut counts = vec![0usize; binning.n_bins()];
    for (&date, &value) in &series.values {
        if let Some(bin) = binning.bin_of(date) {
            totals[bin - 1] += value as f64;
            counts[bin - 1] += 1;
        }
    }
    match agg {
        Aggregation::Sum => totals,
        Aggregation::Mean => totals
            .iter()
            .zip(&counts)
            .map(|(&t, &c)| if c == 0 { 0.0 } else { t / c as f64 })
            .collect(),
    }
}

/// Bin-start override file: one ISO date per line, `#` comments allowed.
pub fn load_bin_boundaries(path: impl AsRef<Path>) -> Result<Vec<NaiveDate>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut starts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let date = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|e| {
            Error::invalid(format!(
                "bin override {} line {}: bad date {line:?}: {e}",
                path.display(),
                i + 1
            ))
        })?;
        starts.push(date);
    }
    Ok(starts)
}

/// Peak bins of one series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeakSet {
    pub series: String,
    /// Sorted 1-based bin indices.
    pub bins: Vec<usize>,
}

/// Local maxima over the per-bin values.
///
/// Equal consecutive values are treated as one run; a run is a peak iff
/// every existing neighbor run is strictly smaller, and it is reported at
/// its first index. Endpoint runs need only their single existing neighbor
/// to be smaller; an all-equal series has no peak.
pub fn detect_peaks(series: impl Into<String>, values: &[f64]) -> Result<PeakSet> {
    if values.len() < 3 {
        return Err(Error::invalid(format!(
            "peak detection needs at least 3 bins, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("peak detection requires finite values"));
    }

    // compress into runs of equal consecutive values
    let mut runs: Vec<(f64, usize)> = Vec::new(); // (value, first 0-based index)
    for (i, &v) in values.iter().enumerate() {
        match runs.last() {
            Some(&(last, _)) if last == v => {}
            _ => runs.push((v, i)),
        }
    }

    let mut bins = Vec::new();
    if runs.len() > 1 {
        for (r, &(value, first)) in runs.iter().enumerate() {
            let left_smaller = r == 0 || runs[r - 1].0 < value;
            let right_smaller = r == runs.len() - 1 || runs[r + 1].0 < value;
            if left_smaller && right_smaller {
                bins.push(first + 1);
            }
        }
    }
    Ok(PeakSet {
        series: series.into(),
        bins,
    })
}

/// One feature-peak/event-peak pair within tolerance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentPair {
    pub feature_series: String,
    pub feature_bin: usize,
    pub event_series: String,
    pub event_bin: usize,
    /// event_bin - feature_bin
    pub offset: i64,
}

/// A peak that participates in no pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnmatchedPeak {
    pub series: String,
    pub bin: usize,
}

/// Descriptive peak-alignment report; no causal claim is encoded.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    pub tolerance_bins: usize,
    pub n_bins: usize,
    pub feature_peaks: Vec<PeakSet>,
    pub event_peaks: Vec<PeakSet>,
    pub matches: Vec<AlignmentPair>,
    pub unmatched_feature: Vec<UnmatchedPeak>,
    pub unmatched_event: Vec<UnmatchedPeak>,
    pub diagnostics: Vec<String>,
}

fn check_grid(peaks: &[PeakSet], n_bins: usize, side: &str) -> Result<()> {
    for set in peaks {
        if let Some(&bad) = set.bins.iter().find(|&&b| b < 1 || b > n_bins) {
            return Err(Error::GridMismatch(format!(
                "{side} series {:?} has peak bin {bad} outside 1..={n_bins}",
                set.series
            )));
        }
    }
    Ok(())
}

/// Emit every (feature peak, event peak) pair with |bin offset| within
/// tolerance, plus the peaks left unmatched on either side.
pub fn align_report(
    feature_peaks: &[PeakSet],
    event_peaks: &[PeakSet],
    tolerance_bins: usize,
    n_bins: usize,
) -> Result<AlignmentReport> {
    check_grid(feature_peaks, n_bins, "feature")?;
    check_grid(event_peaks, n_bins, "event")?;

    let mut matches = Vec::new();
    for feature in feature_peaks {
        for &fb in &feature.bins {
            for event in event_peaks {
                for &eb in &event.bins {
                    let offset = eb as i64 - fb as i64;
                    if offset.unsigned_abs() as usize <= tolerance_bins {
                        matches.push(AlignmentPair {
                            feature_series: feature.series.clone(),
                            feature_bin: fb,
                            event_series: event.series.clone(),
                            event_bin: eb,
                            offset,
                        });
                    }
                }
            }
        }
    }

    let unmatched = |sets: &[PeakSet], matched: &dyn Fn(&str, usize) -> bool| {
        sets.iter()
            .flat_map(|set| {
                set.bins
                    .iter()
                    .filter(|&&bin| !matched(&set.series, bin))
                    .map(|&bin| UnmatchedPeak {
                        series: set.series.clone(),
                        bin,
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let unmatched_feature = unmatched(feature_peaks, &|series: &str, bin: usize| {
        matches
            .iter()
            .any(|m| m.feature_series == series && m.feature_bin == bin)
    });
    let unmatched_event = unmatched(event_peaks, &|series: &str, bin: usize| {
        matches
            .iter()
            .any(|m| m.event_series == series && m.event_bin == bin)
    });

    Ok(AlignmentReport {
        tolerance_bins,
        n_bins,
        feature_peaks: feature_peaks.to_vec(),
        event_peaks: event_peaks.to_vec(),
        matches,
        unmatched_feature,
        unmatched_event,
        diagnostics: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn record(id: &str, published: &str) -> VideoRecord {
        VideoRecord {
            id: id.into(),
            title: String::new(),
            description: String::new(),
            publish_date: date(published),
            duration_s: 1.0,
            views: 0,
            upvotes: 0,
            downvotes: 0,
            audio_path: None,
        }
    }

    fn paper_binning() -> Binning {
        Binning::uniform(date("2020-03-13"), date("2020-06-01"), 7).unwrap()
    }

    #[test]
    fn uniform_bin_assignments() {
        let binning = paper_binning();
        assert_eq!(binning.bin_of(date("2020-03-13")), Some(1));
        assert_eq!(binning.bin_of(date("2020-03-19")), Some(1));
        assert_eq!(binning.bin_of(date("2020-03-20")), Some(2));
        assert_eq!(binning.bin_of(date("2020-03-12")), None);
        assert_eq!(binning.bin_of(date("2020-06-02")), None);
        assert_eq!(binning.start_of(2), date("2020-03-20"));
        // 81 covered days at width 7
        assert_eq!(binning.n_bins(), 12);
    }

    #[test]
    fn rejects_are_reported_not_dropped() {
        let records = vec![
            record("early", "2020-03-01"),
            record("ok", "2020-04-01"),
            record("late", "2020-07-04"),
        ];
        let assignment = assign_bins(&records, &paper_binning());
        let total: usize = assignment.bins.iter().map(|b| b.record_ids.len()).sum();
        assert_eq!(total, 1);
        assert_eq!(assignment.rejects.len(), 2);
        assert_eq!(assignment.rejects[0].id, "early");
    }

    #[test]
    fn explicit_binning_overrides_uniform_boundaries() {
        let starts: Vec<NaiveDate> = ["2020-03-13", "2020-03-20", "2020-03-27"]
            .iter()
            .map(|s| date(s))
            .collect();
        let binning = Binning::explicit(starts, date("2020-04-02")).unwrap();
        assert_eq!(binning.n_bins(), 3);
        assert_eq!(binning.bin_of(date("2020-03-13")), Some(1));
        assert_eq!(binning.bin_of(date("2020-03-26")), Some(2));
        assert_eq!(binning.bin_of(date("2020-04-02")), Some(3));
        assert_eq!(binning.bin_of(date("2020-03-12")), None);
        assert_eq!(binning.bin_of(date("2020-04-03")), None);

        let unsorted = vec![date("2020-03-20"), date("2020-03-13")];
        assert!(Binning::explicit(unsorted, date("2020-06-01")).is_err());
    }

    #[test]
    fn full_range_event_file_gives_81_point_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        let mut body = String::from("date,new_cases,new_deaths,hospitalized\n");
        let mut current = date("2020-03-13");
        while current <= date("2020-06-01") {
            body.push_str(&format!("{current},1,2,3\n"));
            current += Duration::days(1);
        }
        std::fs::write(&path, body).unwrap();
        let series = load_event_series(&path).unwrap();
        assert_eq!(series.len(), 3);
        assert!(series.iter().all(|s| s.values.len() == 81));
    }

    #[test]
    fn event_loading_and_canonicalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        std::fs::write(
            &path,
            "date,new_cases,new_deaths,hospitalized\n\
             2020-03-15,5,1,2\n\
             2020-03-13,3,0,1\n\
             2020-03-14,4,2,0\n",
        )
        .unwrap();
        let series = load_event_series(&path).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series[0].name, "new_cases");
        let dates: Vec<NaiveDate> = series[0].values.keys().copied().collect();
        assert_eq!(
            dates,
            vec![date("2020-03-13"), date("2020-03-14"), date("2020-03-15")]
        );
        assert_eq!(series[1].values[&date("2020-03-14")], 2);

        std::fs::write(
            &path,
            "date,new_cases,new_deaths,hospitalized\n2020-03-13,3,-1,0\n",
        )
        .unwrap();
        match load_event_series(&path) {
            Err(Error::EventLoad { row, detail }) => {
                assert_eq!(row, 1);
                assert!(detail.contains("negative"), "{detail}");
            }
            other => panic!("expected EventLoad, got {other:?}"),
        }

        std::fs::write(
            &path,
            "date,new_cases,new_deaths,hospitalized\n\
             2020-03-13,1,1,1\n2020-03-13,2,2,2\n",
        )
        .unwrap();
        match load_event_series(&path) {
            Err(Error::EventLoad { row, detail }) => {
                assert_eq!(row, 2);
                assert!(detail.contains("duplicate"), "{detail}");
            }
            other => panic!("expected EventLoad, got {other:?}"),
        }
    }

    #[test]
    fn weekly_aggregate_sums_and_conserves() {
        let binning = paper_binning();
        let mut values = BTreeMap::new();
        for d in 0..7 {
            values.insert(date("2020-03-13") + Duration::days(d), 10u64);
        }
        let series = EventSeries {
            name: "x".into(),
            values,
        };
        let totals = weekly_aggregate(&series, &binning, Aggregation::Sum);
        assert_eq!(totals[0], 70.0);
        assert!(totals[1..].iter().all(|&t| t == 0.0));

        let means = weekly_aggregate(&series, &binning, Aggregation::Mean);
        assert_eq!(means[0], 10.0);

        // impulse 20 days after the anchor lands in bin 3
        let impulse = EventSeries {
            name: "i".into(),
            values: BTreeMap::from([(date("2020-03-13") + Duration::days(20), 100u64)]),
        };
        let totals = weekly_aggregate(&impulse, &binning, Aggregation::Sum);
        assert_eq!(totals[2], 100.0);
        assert_eq!(totals.iter().sum::<f64>(), 100.0);
    }

    #[test]
    fn peak_examples() {
        assert_eq!(detect_peaks("s", &[1.0, 3.0, 1.0]).unwrap().bins, vec![2]);
        assert_eq!(
            detect_peaks("s", &[1.0, 2.0, 2.0, 1.0]).unwrap().bins,
            vec![2]
        );
        assert_eq!(
            detect_peaks("s", &[1.0, 2.0, 3.0, 4.0]).unwrap().bins,
            vec![4]
        );
        assert_eq!(
            detect_peaks("s", &[4.0, 1.0, 2.0]).unwrap().bins,
            vec![1, 3]
        );
        assert_eq!(detect_peaks("s", &[2.0, 2.0, 1.0]).unwrap().bins, vec![1]);
        assert!(detect_peaks("s", &[5.0, 5.0, 5.0]).unwrap().bins.is_empty());
        assert!(detect_peaks("s", &[1.0, 2.0]).is_err());
    }

    #[test]
    fn alignment_examples() {
        let features = vec![PeakSet {
            series: "jitter_mean".into(),
            bins: vec![3, 5, 8],
        }];
        let events = vec![PeakSet {
            series: "new_cases".into(),
            bins: vec![3, 5],
        }];
        let report = align_report(&features, &events, 1, 11).unwrap();
        assert_eq!(report.matches.len(), 2);
        assert!(report
            .matches
            .iter()
            .all(|m| m.offset == 0 && m.feature_bin == m.event_bin));
        assert_eq!(
            report.unmatched_feature,
            vec![UnmatchedPeak {
                series: "jitter_mean".into(),
                bin: 8
            }]
        );
        assert!(report.unmatched_event.is_empty());

        let bad = vec![PeakSet {
            series: "oops".into(),
            bins: vec![12],
        }];
        assert!(matches!(
            align_report(&bad, &events, 1, 11),
            Err(Error::GridMismatch(_))
        ));
    }

    proptest! {
        // binning partitions the accepted records
        #[test]
        fn binning_is_a_partition(days in proptest::collection::vec(-30i64..120, 0..60)) {
            let binning = paper_binning();
            let records: Vec<VideoRecord> = days
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let mut r = record("x", "2020-03-13");
                    r.id = format!("r{i}");
                    r.publish_date = date("2020-03-13") + Duration::days(d);
                    r
                })
                .collect();
            let assignment = assign_bins(&records, &binning);
            let binned: usize = assignment.bins.iter().map(|b| b.record_ids.len()).sum();
            prop_assert_eq!(binned + assignment.rejects.len(), records.len());

            // every accepted record appears in exactly one bin
            let mut seen = std::collections::HashSet::new();
            for bin in &assignment.bins {
                for id in &bin.record_ids {
                    prop_assert!(seen.insert(id.clone()));
                }
            }
        }

        #[test]
        fn aggregation_conserves_mass(offsets in proptest::collection::vec(-10i64..100, 1..50)) {
            let binning = paper_binning();
            let mut values = BTreeMap::new();
            for (i, &d) in offsets.iter().enumerate() {
                values.insert(date("2020-03-13") + Duration::days(d), (i as u64 % 17) + 1);
            }
            let series = EventSeries { name: "x".into(), values: values.clone() };
            let totals = weekly_aggregate(&series, &binning, Aggregation::Sum);
            let in_range: u64 = values
                .iter()
                .filter(|(d, _)| binning.bin_of(**d).is_some())
                .map(|(_, v)| *v)
                .sum();
            prop_assert_eq!(totals.iter().sum::<f64>(), in_range as f64);
        }

        // positive affine transformation leaves the peak set unchanged
        #[test]
        fn peaks_affine_invariant(
            values in proptest::collection::vec(-1000i32..1000, 3..30),
            scale in 0.25f64..8.0,
            shift in -50.0f64..50.0,
        ) {
            let base: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let transformed: Vec<f64> = base.iter().map(|v| v * scale + shift).collect();
            let a = detect_peaks("s", &base).unwrap();
            let b = detect_peaks("s", &transformed).unwrap();
            prop_assert_eq!(a.bins, b.bins);
        }

        // swapping feature/event roles preserves the matched pair set
        #[test]
        fn alignment_is_role_symmetric(
            fbins in proptest::collection::btree_set(1usize..12, 0..5),
            ebins in proptest::collection::btree_set(1usize..12, 0..5),
            tolerance in 0usize..3,
        ) {
            let features = vec![PeakSet { series: "f".into(), bins: fbins.into_iter().collect() }];
            let events = vec![PeakSet { series: "e".into(), bins: ebins.into_iter().collect() }];
            let forward = align_report(&features, &events, tolerance, 11).unwrap();
            let swapped = align_report(&events, &features, tolerance, 11).unwrap();
            let forward_pairs: std::collections::BTreeSet<(usize, usize)> = forward
                .matches
                .iter()
                .map(|m| (m.feature_bin, m.event_bin))
                .collect();
            let swapped_pairs: std::collections::BTreeSet<(usize, usize)> = swapped
                .matches
                .iter()
                .map(|m| (m.event_bin, m.feature_bin))
                .collect();
            prop_assert_eq!(forward_pairs, swapped_pairs);
        }
    }
}
