//! Character recognition rate and corpus-level aggregation.

use serde::{Deserialize, Serialize};

use crate::align::{align, AlignmentCounts};
use crate::error::{Error, Result};
use crate::model::PageAnnotation;
use crate::normalize::{normalize_text, NormalizationPolicy};

/// A metric value together with the alignment counts it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub counts: AlignmentCounts,
}

/// CRR = 1 - (S + D + I) / (S + D + C).
///
/// Unbounded below: insertion-heavy predictions drive it negative. The
/// empty-reference conventions are 1.0 for empty vs empty and 0.0 when the
/// hypothesis inserts characters against an empty reference.
pub fn crr(counts: &AlignmentCounts) -> MetricValue {
    let n = counts.reference_len();
    let value = if n == 0 {
        if counts.insertions == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - counts.distance() as f64 / n as f64
    };
    MetricValue {
        value,
        counts: *counts,
    }
}

/// A page's text as scored at page level: lines in reading order, each
/// normalized under the policy, joined by single newlines.
///
/// The newline is inserted after normalization so it is immune to
/// whitespace collapsing and charset filtering; it counts as one character
/// during page-level alignment.
pub fn page_text(page: &PageAnnotation, policy: &NormalizationPolicy) -> String {
    page.lines_in_order()
        .iter()
        .map(|line| normalize_text(&line.text, policy))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Page-level CRR: both pages flattened to a single sequence in reading
/// order and aligned as a whole, which makes the result sensitive to line
/// ordering.
pub fn page_crr(
    gt: &PageAnnotation,
    pred: &PageAnnotation,
    policy: &NormalizationPolicy,
) -> MetricValue {
    let reference = page_text(gt, policy);
    let hypothesis = page_text(pred, policy);
    crr(&align(&reference, &hypothesis))
}

/// Corpus-level roll-up of a per-page metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetric {
    /// Mean weighted by ground-truth character count, the headline number.
    pub weighted: f64,
    /// Plain mean over pages.
    pub unweighted: f64,
    pub total_weight: u64,
    pub pages: usize,
}

/// Aggregate per-page metric values into corpus numbers. Weights are
/// ground-truth character counts. With an all-zero total weight the
/// weighted mean falls back to the unweighted one.
pub fn aggregate(per_page: &[(f64, u64)]) -> Result<CorpusMetric> {
    if per_page.is_empty() {
        return Err(Error::EmptyCorpus("no pages to aggregate".into()));
    }
    let pages = per_page.len();
    let total_weight: u64 = per_page.iter().map(|&(_, w)| w).sum();
    let unweighted = per_page.iter().map(|&(v, _)| v).sum::<f64>() / pages as f64;
    let weighted = if total_weight == 0 {
        unweighted
    } else {
        per_page
            .iter()
            .map(|&(v, w)| v * w as f64)
            .sum::<f64>()
            / total_weight as f64
    };
    Ok(CorpusMetric {
        weighted,
        unweighted,
        total_weight,
        pages,
    })
}
