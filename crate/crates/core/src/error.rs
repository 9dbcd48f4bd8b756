use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
///
/// Variants fall into three families (configuration, data, computation) which
/// map onto the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("unknown column \"{0}\"")]
    UnknownColumn(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("row {row}: unit {unit}: gap in day axis after {after}")]
    DayGap {
        unit: String,
        after: chrono::NaiveDate,
        row: usize,
    },

    #[error("duplicate unit \"{0}\"")]
    DuplicateUnit(String),

    #[error("no metadata for unit \"{0}\"")]
    MissingMeta(String),

    #[error("unit id mismatch: series {series} vs metadata {meta}")]
    UnitMismatch { series: String, meta: String },

    #[error("window outside data: [{start}, {end}] not within [{data_start}, {data_end}] for unit {unit}")]
    WindowOutsideData {
        unit: String,
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
        data_start: chrono::NaiveDate,
        data_end: chrono::NaiveDate,
    },

    #[error("series too short: {len} days, need at least {need}")]
    SeriesTooShort { len: usize, need: usize },

    #[error("no infection signal (all smoothed values are zero)")]
    NoSignal,

    #[error("cannot center curve: {0} crossing is censored")]
    CannotCenter(&'static str),

    #[error("empty column")]
    EmptyColumn,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("all-zero counts")]
    ZeroCounts,

    #[error("degenerate target: {0} has zero entropy")]
    DegenerateTarget(String),

    #[error("zero cell in denominator position ({row}, 0)")]
    ZeroDenominator { row: usize },

    #[error("not enough rows: {have} usable, need {need}")]
    NotEnoughRows { have: usize, need: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing artifact {path}: run `{stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("stage {stage}: {subject}: {source}")]
    Stage {
        stage: &'static str,
        subject: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str, subject: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            subject: subject.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 config/validation, 3 data, 4 computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownColumn(_)
            | Error::InvalidArgument(_)
            | Error::MissingArtifact { .. } => 2,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::DayGap { .. }
            | Error::DuplicateUnit(_)
            | Error::MissingMeta(_)
            | Error::UnitMismatch { .. }
            | Error::WindowOutsideData { .. }
            | Error::SeriesTooShort { .. } => 3,
            Error::NoSignal
            | Error::CannotCenter(_)
            | Error::EmptyColumn
            | Error::LengthMismatch(..)
            | Error::ZeroCounts
            | Error::DegenerateTarget(_)
            | Error::ZeroDenominator { .. }
            | Error::NotEnoughRows { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}
