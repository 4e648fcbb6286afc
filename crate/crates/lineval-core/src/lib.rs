//! End-to-end OCR evaluation at the page and line level.
//!
//! The crate covers five areas:
//!
//! - **Metrics** ([`align`], [`metrics`], [`fca`]): unit-cost edit
//!   alignment with error-category counts, page-level character
//!   recognition rate (CRR), and the order-independent Flexible Character
//!   Accuracy (FCA), plus character-weighted corpus aggregation.
//! - **Reading order** ([`order`]): blind geometric ordering by line
//!   centroids and reference-guided reordering by edit similarity.
//! - **Ingest** ([`model`], [`ingest`], [`normalize`]): the JSON page
//!   annotation format, validation, and the normalization policy (NFC,
//!   case folding, charset filtering, whitespace collapsing) applied
//!   before any metric.
//! - **Synthetic data** ([`synth`]): a seeded, fully deterministic
//!   line-image generator with blur, skew/shear, noise, and background
//!   distortions, emitting 32x400 grayscale PNGs plus a manifest.
//! - **Benchmark harness** ([`harness`], [`report`]): subprocess adapters
//!   for external OCR engines, per-page wall timing with stage exclusion,
//!   and deterministic CSV/Markdown/JSON comparison reports.

pub mod align;
pub mod error;
pub mod fca;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod order;
pub mod report;
pub mod stats;
pub mod synth;

pub use align::{align, levenshtein, semi_global_levenshtein, AlignmentCounts};
pub use error::{Error, Result};
pub use fca::{fca, FcaMatch, FcaMatchSet, FcaParams};
pub use harness::{
    evaluate, run_engine, EngineAdapter, EngineConfig, EngineRun, EvalOptions, StageLabel,
    TimingRecord,
};
pub use ingest::{load_corpus, load_page, save_corpus};
pub use metrics::{aggregate, crr, page_crr, page_text, CorpusMetric, MetricValue};
pub use model::{
    line_centroid, validate_page, Corpus, PageAnnotation, PageKind, Point2, TextLine, Violation,
    ViolationKind,
};
pub use normalize::{builtin_charset, normalize_text, Charset, NormalizationPolicy, UnicodeForm};
pub use order::{order_blind, order_by_reference, OrderingStrategy, ReorderTrace};
pub use report::{emit_report, render_report, EvalReport, ReportFormat};
pub use stats::{char_frequency, words_per_line, Histogram};
pub use synth::{
    generate_dataset, render_line, sample_specs, Background, DistortionParams, DistortionRanges,
    GlyphSource, GrayImage, Manifest, Noise, SynthSpec,
};
