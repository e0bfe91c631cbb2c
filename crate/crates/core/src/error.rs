use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Every message starts with a stable kebab-case kind so command-line
/// diagnostics can be matched by scripts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed-marker: {0}")]
    MalformedMarker(String),
    #[error("unsupported-feature: {0}")]
    UnsupportedFeature(String),
    #[error("truncated-stream: {0}")]
    TruncatedStream(&'static str),
    #[error("invalid-huffman-code: {0}")]
    InvalidHuffmanCode(&'static str),
    #[error("coefficient-out-of-range: value {value} at block ({block_row},{block_col}) mode {mode}")]
    CoefficientOutOfRange {
        value: i32,
        block_row: usize,
        block_col: usize,
        mode: usize,
    },
    #[error("coefficient-overflow: block ({block_row},{block_col}) mode {mode} would become {value}")]
    CoefficientOverflow {
        value: i32,
        block_row: usize,
        block_col: usize,
        mode: usize,
    },
    #[error("invalid-image: {0}")]
    InvalidImage(String),
    #[error("bad-magic: expected COEF1 sidecar")]
    BadMagic,
    #[error("length-mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("mode-out-of-range: ({0},{1})")]
    ModeOutOfRange(usize, usize),
    #[error("block-out-of-range: ({0},{1})")]
    BlockOutOfRange(usize, usize),
    #[error("dimension-mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid-parameter: {0}")]
    InvalidParameter(String),
    #[error("qf-out-of-range: {0} (regression covers 75..=95; pass an explicit p)")]
    QfOutOfRange(i32),
    #[error("no-table-entry: QF {qf} / {steganalyzer}")]
    NoTableEntry { qf: i32, steganalyzer: String },
    #[error("unknown-quant-table: no standard quality scaling matches; pass an explicit p")]
    UnknownQuantTable,
    #[error("target-unreachable: {target} bits requested, at most {max} available")]
    TargetUnreachable { target: f64, max: f64 },
    #[error("degenerate-costs: {0}")]
    DegenerateCosts(&'static str),
    #[error("degenerate-input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid-csv: line {line}: {msg}")]
    InvalidCsv { line: usize, msg: String },
}

impl Error {
    /// True for errors raised while decoding an input file (as opposed to
    /// numeric or constraint failures).
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedMarker(_)
                | Error::UnsupportedFeature(_)
                | Error::TruncatedStream(_)
                | Error::InvalidHuffmanCode(_)
                | Error::InvalidImage(_)
                | Error::BadMagic
                | Error::LengthMismatch { .. }
                | Error::InvalidCsv { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
