use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::CellPath;
use crate::validate::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A located syntax error in one of the text formats.
///
/// `line` and `column` are 1-based; `column` counts characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// Source position attached to errors raised while loading a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

fn at(pos: &Option<Position>) -> String {
    match pos {
        Some(p) => format!("{p}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("{}duplicate graph id {id:?}", at(.pos))]
    DuplicateGraphId { id: String, pos: Option<Position> },
    #[error("{}unknown unit {unit:?}", at(.pos))]
    UnknownUnit { unit: String, pos: Option<Position> },
    #[error("{}duplicate property {id}", at(.pos))]
    DuplicateProperty { id: u32, pos: Option<Position> },
    #[error("{}unknown element type {name:?}", at(.pos))]
    UnknownElementType { name: String, pos: Option<Position> },
    #[error("unsupported format version {found:?}")]
    VersionMismatch { found: String },
    #[error("invalid template: {}", first_error(.diagnostics))]
    InvalidTemplate { diagnostics: Vec<Diagnostic> },
    #[error("path {path} is out of range")]
    PathOutOfRange { path: CellPath },
    #[error("path {path} does not address a leaf")]
    PathNotLeaf { path: CellPath },
    #[error("the header record is read-only")]
    HeaderReadonly,
    #[error("operation not allowed on the header record")]
    HeaderRecord,
    #[error("unit {from:?} cannot be stored in a cell measured in {to:?}")]
    UnitDimensionMismatch { from: String, to: String },
    #[error("cannot convert between {from:?} and {to:?}")]
    DimensionMismatch { from: String, to: String },
    #[error("invalid cell value: {reason}")]
    InvalidValue { reason: String },
    #[error("path {path} does not address an arbitrary split")]
    NotArbitrarySplit { path: CellPath },
    #[error("point ({x}, {y}) is outside the table")]
    OutsideTable { x: f64, y: f64 },
    #[error("point falls into the empty block {path}")]
    EmptyBlock { path: CellPath },
    #[error("chunk height {chunk} mm is smaller than the required {required} mm")]
    ChunkTooSmall { chunk: f64, required: f64 },
    #[error("record {record} is {height} mm tall but a chunk only holds {available} mm")]
    RecordTallerThanChunk {
        record: usize,
        height: f64,
        available: f64,
    },
    #[error("no catalog for object class {0:?}")]
    UnknownObjectClass(String),
    #[error("placeholder {{{name}}} does not name a catalog field")]
    UnresolvedPlaceholder { name: String },
    #[error("template has no data leaf carrying a property")]
    NoDataSplit,
    #[error("row range {start}..{end} is out of bounds ({len} rows)")]
    RangeOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("unknown graph {0:?}")]
    UnknownGraph(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
}

fn first_error(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .find(|d| d.is_error())
        .or(diagnostics.first())
        .map(|d| d.to_string())
        .unwrap_or_default()
}

impl Error {
    /// Stable kebab-case identifier used by the CLI and the HTTP API.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "syntax-error",
            Error::DuplicateGraphId { .. } => "duplicate-graph-id",
            Error::UnknownUnit { .. } => "unknown-unit",
            Error::DuplicateProperty { .. } => "duplicate-property",
            Error::UnknownElementType { .. } => "unknown-element-type",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::InvalidTemplate { .. } => "invalid-template",
            Error::PathOutOfRange { .. } => "path-out-of-range",
            Error::PathNotLeaf { .. } => "path-not-leaf",
            Error::HeaderReadonly => "header-readonly",
            Error::HeaderRecord => "header-record",
            Error::UnitDimensionMismatch { .. } => "unit-dimension-mismatch",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidValue { .. } => "invalid-value",
            Error::NotArbitrarySplit { .. } => "not-arbitrary-split",
            Error::OutsideTable { .. } => "outside-table",
            Error::EmptyBlock { .. } => "empty-block",
            Error::ChunkTooSmall { .. } => "chunk-too-small",
            Error::RecordTallerThanChunk { .. } => "record-taller-than-chunk",
            Error::UnknownObjectClass(_) => "unknown-object-class",
            Error::UnresolvedPlaceholder { .. } => "unresolved-placeholder",
            Error::NoDataSplit => "no-data-split",
            Error::RangeOutOfBounds { .. } => "range-out-of-bounds",
            Error::UnknownGraph(_) => "unknown-graph",
            Error::FileNotFound(_) => "file-not-found",
        }
    }

    /// Line/column of the error inside the loaded text, when known.
    pub fn position(&self) -> Option<Position> {
        match self {
            Error::Syntax(e) => Some(Position {
                line: e.line,
                column: e.column,
            }),
            Error::DuplicateGraphId { pos, .. }
            | Error::UnknownUnit { pos, .. }
            | Error::DuplicateProperty { pos, .. }
            | Error::UnknownElementType { pos, .. } => *pos,
            _ => None,
        }
    }
}

impl From<SyntaxError> for Error {
    fn from(e: SyntaxError) -> Self {
        Error::Syntax(e)
    }
}
