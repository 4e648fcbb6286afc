//! Error types shared across the toolkit.

use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (bad JSON, bad atlas, bad engine config).
    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    /// A page or corpus breaks an annotation invariant.
    #[error("validation failed for {context}: {}", format_violations(violations))]
    Validation {
        context: String,
        violations: Vec<Violation>,
    },

    #[error("unknown charset `{0}` (expected `english95`, `english95_space`, or a charset file)")]
    UnknownCharset(String),

    /// Operation needs polygon geometry the line does not carry.
    #[error("line `{0}` has no usable polygon")]
    MissingGeometry(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("no glyph for {0:?} and the glyph source has no fallback")]
    MissingGlyph(char),

    #[error("typeset width {width}px exceeds the cap of {cap}px")]
    TextTooLong { width: u32, cap: u32 },

    #[error("synth spec has empty text")]
    EmptySpecText,

    #[error("invalid distortion parameters: {0}")]
    InvalidDistortion(String),

    #[error("invalid FCA parameters: {0}")]
    InvalidFcaParams(String),

    /// Engine adapter misconfiguration, caught before any page is run.
    #[error("engine adapter `{name}`: {detail}")]
    AdapterConfig { name: String, detail: String },

    /// Prediction page id that does not exist in the ground truth.
    #[error("prediction page `{0}` not present in ground truth")]
    UnknownPage(String),

    #[error("glyph atlas error: {0}")]
    Atlas(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
