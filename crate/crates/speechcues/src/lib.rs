//! Speech-cue analytics for timestamped vlog corpora.
//!
//! The crate implements a batch pipeline that turns a metadata CSV plus a
//! directory of WAV recordings into weekly trend tables:
//!
//! 1. [`corpus`] — load, validate, deduplicate and filter recording metadata;
//!    annotator-agreement statistics; search-query generation.
//! 2. [`audio`] — WAV decoding into normalized mono buffers, framing and
//!    windowing primitives shared by the analysis stages.
//! 3. [`diarization`] — per-window retain/reject decisions against a labeled
//!    reference segment of the target speaker, via cosine similarity in a
//!    fixed-dimension embedding space.
//! 4. [`prosody`] — loudness, zero-crossing rate, jitter and shimmer per
//!    frame, aggregated into an 18-dimensional per-recording descriptor.
//! 5. [`linguistics`] — tokenization and per-bin word-frequency tables over
//!    titles and descriptions.
//! 6. [`timeline`] — fixed-width date binning, per-bin feature averaging,
//!    daily event-series ingestion, peak detection, and peak alignment.
//! 7. [`pipeline`] + [`config`] — the orchestration layer behind the
//!    `speechcues` CLI (`scan`, `extract`, `words`, `report`).
//!
//! All operations are deterministic: identical inputs and configuration
//! produce byte-identical outputs, regardless of worker count.

use std::path::PathBuf;

use thiserror::Error;

pub mod audio;
pub mod config;
pub mod corpus;
pub mod diarization;
pub mod linguistics;
pub mod pipeline;
pub mod prosody;
pub mod report;
pub mod timeline;

pub use audio::{AudioBuffer, FrameSpec};
pub use config::PipelineConfig;
pub use corpus::VideoRecord;
pub use diarization::SpeechMask;
pub use prosody::ProsodyVector;
pub use timeline::{EventSeries, PeakSet, TimeBin};

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("audio file not found: {}", path.display())]
    AudioMissing { path: PathBuf },

    #[error("unsupported audio format in {}: {detail}", path.display())]
    AudioUnsupported { path: PathBuf, detail: String },

    #[error("truncated audio data in {}", path.display())]
    AudioTruncated { path: PathBuf },

    /// The buffer is shorter than a single analysis window.
    #[error("no analyzable audio: input shorter than one analysis window")]
    NoAnalyzableAudio,

    /// Diarization rejected every window of the recording.
    #[error("no speech retained: diarization rejected every window")]
    NoSpeechRetained,

    #[error("embedding file {}, line {line}: {detail}", path.display())]
    EmbeddingLoad {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("metadata row {row}: {detail}")]
    MetadataLoad { row: usize, detail: String },

    #[error("event series row {row}: {detail}")]
    EventLoad { row: usize, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("bin grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
