//! On-disk datasets: raw scrape, preprocessed bids, and SB features.
//!
//! All written files use comma delimiters, minimal double-quote quoting,
//! UTF-8 and LF line endings.

mod preprocessed;
mod raw;
mod sb;

use std::io;
use std::path::{Path, PathBuf};

pub use preprocessed::{
    encode_preprocessed, read_preprocessed, read_preprocessed_from, validate_records, write_preprocessed,
    PREPROCESSED_HEADER,
};
pub use raw::{
    read_raw, read_raw_from, write_rejects, ColumnMissing, RawField, RawRecord, RawSchema, RawTable, Rejection,
    SchemaReport,
};
pub use sb::{encode_sb_dataset, read_sb_dataset, read_sb_dataset_from, write_sb_dataset, SB_HEADER, SCORE_COLUMN};

use crate::model::{ModelError, Pattern};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: missing header row", path.display())]
    MissingHeader { path: PathBuf },
    #[error("{}: header lacks configured column(s): {}", path.display(), missing.join(", "))]
    HeaderMismatch { path: PathBuf, missing: Vec<String> },
    #[error("{}: unexpected header, expected `{expected}`", path.display())]
    UnexpectedHeader { path: PathBuf, expected: String },
    #[error("{}: row {row}: {message}", path.display())]
    Row { path: PathBuf, row: u64, message: String },
    #[error("schema config line {line}: {message}")]
    SchemaConfig { line: usize, message: String },
    #[error("refusing to write: {0}")]
    Invariant(#[from] ModelError),
    #[error("outlier: auction {auction_id}, bidder {bidder_id}: {pattern} = {value} outside [0, 1]")]
    Outlier { auction_id: u64, bidder_id: String, pattern: Pattern, value: f64 },
    #[error("{0} scores given for {1} instances")]
    ScoreCount(usize, usize),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn csv_writer<W: io::Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner)
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}
