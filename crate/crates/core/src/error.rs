use crate::dataset::DatasetError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::model::{ModelError, WeightError};
use crate::preprocess::{ParseError, PreprocessError};
use crate::synth::SynthError;

/// Broad failure class, used by the command-line front end to pick an exit
/// status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Input,
    Invariant,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Input => 2,
            ErrorKind::Invariant => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Config(String),
}

fn ingest_kind(e: &IngestError) -> ErrorKind {
    match e {
        IngestError::Io { .. } => ErrorKind::Io,
        IngestError::Csv { source, .. } if source.is_io_error() => ErrorKind::Io,
        IngestError::Invariant(_) | IngestError::Outlier { .. } => ErrorKind::Invariant,
        _ => ErrorKind::Input,
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Ingest(e) => ingest_kind(e),
            Error::Preprocess(PreprocessError::Ingest(e)) => ingest_kind(e),
            Error::Preprocess(PreprocessError::Invariant(_) | PreprocessError::DuplicateAuctionKey(_)) => {
                ErrorKind::Invariant
            }
            Error::Preprocess(_) => ErrorKind::Input,
            Error::Dataset(DatasetError::Empty) => ErrorKind::Input,
            Error::Dataset(_) | Error::Model(_) => ErrorKind::Invariant,
            Error::Metrics(MetricsError::EmptyDataset | MetricsError::MissingWeight(_)) => ErrorKind::Input,
            Error::Metrics(_) => ErrorKind::Invariant,
            Error::Weights(_) | Error::Parse(_) | Error::Synth(_) | Error::Config(_) => ErrorKind::Input,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }
}
