//! Word-frequency analysis over titles and descriptions.
//!
//! Frequencies are average occurrences per video within a bin (counts can
//! exceed 1), not document fractions.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::corpus::VideoRecord;
use crate::{Error, Result};

/// Words the trend trajectory tracks by default.
pub const DEFAULT_TARGET_WORDS: [&str; 4] = ["quarantine", "coronavirus", "covid", "pandemic"];

/// Lowercase; split on any non-alphanumeric character; keep pure-digit
/// tokens; drop empty tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Per-bin word counts plus the bin's video count; frequency of a word is
/// `count / n_videos`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTable {
    counts: BTreeMap<String, u64>,
    n_videos: usize,
}

impl WordTable {
    pub fn n_videos(&self) -> usize {
        self.n_videos
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn frequency(&self, word: &str) -> f64 {
        self.count(word) as f64 / self.n_videos as f64
    }

    /// Total non-stopword token count of the bin.
    pub fn total_tokens(&self) -> u64 {
        self.counts.values().sum()
    }

    /// All (word, frequency) entries in word order.
    pub fn frequencies(&self) -> impl Iterator<Item = (&str, f64)> {
        self.counts
            .iter()
            .map(|(w, &c)| (w.as_str(), c as f64 / self.n_videos as f64))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Count every non-stopword token occurrence over concatenated title and
/// description of each record in the bin.
pub fn word_freq(records: &[&VideoRecord], stopwords: &HashSet<String>) -> Result<WordTable> {
    if records.is_empty() {
        return Err(Error::invalid("word_freq requires a nonempty bin"));
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for record in records {
        for field in [&record.title, &record.description] {
            for token in tokenize(field) {
                if !stopwords.contains(&token) {
                    *counts.entry(token).or_default() += 1;
                }
            }
        }
    }
    Ok(WordTable {
        counts,
        n_videos: records.len(),
    })
}

/// Up to `k` entries, descending by frequency, ties broken lexicographically
/// ascending.
pub fn top_k(table: &WordTable, k: usize) -> Vec<(String, f64)> {
    let mut entries: Vec<(String, f64)> = table
        .frequencies()
        .map(|(w, f)| (w.to_string(), f))
        .collect();
    entries.sort_by(|(wa, fa), (wb, fb)| {
        fb.partial_cmp(fa)
            .expect("finite frequencies")
            .then_with(|| wa.cmp(wb))
    });
    entries.truncate(k);
    entries
}

/// Per-bin maximum frequency over the target-word set; 0 for bins without a
/// table or without any target word.
pub fn target_trajectory(tables: &[Option<WordTable>], target_words: &[String]) -> Vec<f64> {
    tables
        .iter()
        .map(|table| match table {
            Some(t) => target_words
                .iter()
                .map(|w| t.frequency(w))
                .fold(0.0, f64::max),
            None => 0.0,
        })
        .collect()
}

/// Stopword file: one token per line; compared against lowercased tokens.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}
