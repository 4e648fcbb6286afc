//! Flexible Character Accuracy: order-independent page accuracy computed by
//! greedily matching lines across the page, with splitting for line
//! merge/split mismatches.
//!
//! The matching procedure is fully deterministic and independent of the
//! input reading order: every round scans all ground-truth/prediction line
//! pairs, scores each pair by semi-global alignment of the shorter line
//! inside the longer one, and commits the lowest-penalty pair. The
//! unaligned head and tail of the longer line are re-pooled as fresh lines
//! when long enough, which is what makes merged and split lines score
//! cleanly. Pooled counts over all matches plus unmatched characters yield
//! the final value, clamped to [0, 1].

use serde::{Deserialize, Serialize};

use crate::align::{semi_global_align, semi_global_distance, AlignmentCounts};
use crate::error::{Error, Result};
use crate::metrics::{crr, MetricValue};
use crate::model::PageAnnotation;
use crate::normalize::{normalize_text, NormalizationPolicy};

/// Knobs of the FCA matching procedure.
///
/// Ties between equally cheap pairs are broken by a fixed rule: longer
/// ground-truth line first, then smaller ground-truth line key, then
/// smaller prediction line key (a line's key is its id plus a split
/// counter for re-pooled fragments).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcaParams {
    /// Re-pool an unaligned remainder only when, after trimming boundary
    /// whitespace, it has at least this many characters.
    pub min_split_length: usize,
    /// Stop matching once the best pair's normalized penalty
    /// (distance / longer length) exceeds this.
    pub max_match_penalty: f64,
}

impl Default for FcaParams {
    fn default() -> Self {
        FcaParams {
            min_split_length: 2,
            max_match_penalty: 0.75,
        }
    }
}

impl FcaParams {
    pub fn new(min_split_length: usize, max_match_penalty: f64) -> Result<Self> {
        let params = FcaParams {
            min_split_length,
            max_match_penalty,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_split_length < 1 {
            return Err(Error::InvalidFcaParams(
                "min_split_length must be at least 1".into(),
            ));
        }
        if !(self.max_match_penalty > 0.0 && self.max_match_penalty <= 1.0) {
            return Err(Error::InvalidFcaParams(
                "max_match_penalty must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One committed line match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcaMatch {
    pub gt_segment: String,
    pub pred_segment: String,
    /// Counts with the ground-truth segment as the reference side.
    pub counts: AlignmentCounts,
}

/// The complete character accounting behind one FCA value.
///
/// Every normalized ground-truth character ends up in exactly one place:
/// the reference side of a match, `unmatched_gt_chars`, or
/// `dropped_gt_boundary_spaces` (whitespace trimmed where a line was
/// split); likewise for prediction characters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcaMatchSet {
    pub matches: Vec<FcaMatch>,
    pub unmatched_gt_chars: u64,
    pub unmatched_pred_chars: u64,
    pub dropped_gt_boundary_spaces: u64,
    pub dropped_pred_boundary_spaces: u64,
    pub params: FcaParams,
}

impl FcaMatchSet {
    /// Counts pooled over all matches, with unmatched ground-truth
    /// characters as deletions and unmatched prediction characters as
    /// insertions.
    pub fn pooled_counts(&self) -> AlignmentCounts {
        let mut pooled = AlignmentCounts::default();
        for m in &self.matches {
            pooled.absorb(&m.counts);
        }
        pooled.deletions += self.unmatched_gt_chars;
        pooled.insertions += self.unmatched_pred_chars;
        pooled
    }

    /// Ground-truth characters accounted for (matched + unmatched + dropped).
    pub fn accounted_gt_chars(&self) -> u64 {
        self.matches
            .iter()
            .map(|m| m.counts.reference_len())
            .sum::<u64>()
            + self.unmatched_gt_chars
            + self.dropped_gt_boundary_spaces
    }

    /// Prediction characters accounted for (matched + unmatched + dropped).
    pub fn accounted_pred_chars(&self) -> u64 {
        self.matches
            .iter()
            .map(|m| m.counts.substitutions + m.counts.insertions + m.counts.correct)
            .sum::<u64>()
            + self.unmatched_pred_chars
            + self.dropped_pred_boundary_spaces
    }
}

/// Pool line identity: origin line id plus a fragment counter, 0 for the
/// original line and 1.. for re-pooled remainders in creation order.
type PoolKey = (String, u32);

struct PoolEntry {
    key: PoolKey,
    chars: Vec<char>,
    alive: bool,
}

/// Flexible Character Accuracy of a prediction page against a ground-truth
/// page. Both pages are normalized under `policy` first; empty normalized
/// lines carry no characters and are ignored.
///
/// The result is invariant, bit for bit, under any permutation of either
/// page's reading order.
pub fn fca(
    gt: &PageAnnotation,
    pred: &PageAnnotation,
    policy: &NormalizationPolicy,
    params: &FcaParams,
) -> (MetricValue, FcaMatchSet) {
    debug_assert!(params.validate().is_ok());

    let mut gt_pool = build_pool(gt, policy);
    let mut pred_pool = build_pool(pred, policy);

    let mut set = FcaMatchSet {
        matches: Vec::new(),
        unmatched_gt_chars: 0,
        unmatched_pred_chars: 0,
        dropped_gt_boundary_spaces: 0,
        dropped_pred_boundary_spaces: 0,
        params: *params,
    };

    // dist[gi][pi] = semi-global distance of the shorter line in the longer.
    let mut dist: Vec<Vec<u64>> = gt_pool
        .iter()
        .map(|g| {
            pred_pool
                .iter()
                .map(|p| pair_distance(&g.chars, &p.chars))
                .collect()
        })
        .collect();

    let mut next_fragment: u32 = 1;

    while let Some((gi, pi)) = select_pair(&gt_pool, &pred_pool, &dist) {
        let d = dist[gi][pi];
        let g_len = gt_pool[gi].chars.len();
        let p_len = pred_pool[pi].chars.len();
        let penalty = d as f64 / g_len.max(p_len) as f64;
        if penalty > params.max_match_penalty {
            break;
        }

        let gt_is_pattern = g_len <= p_len;
        let (pattern, text) = if gt_is_pattern {
            (&gt_pool[gi].chars, &pred_pool[pi].chars)
        } else {
            (&pred_pool[pi].chars, &gt_pool[gi].chars)
        };
        let alignment = semi_global_align(pattern, text);
        debug_assert_eq!(alignment.distance, d);

        let window: String = text[alignment.start..alignment.end].iter().collect();
        let pattern_str: String = pattern.iter().collect();
        let (gt_segment, pred_segment, counts) = if gt_is_pattern {
            (pattern_str, window, alignment.counts)
        } else {
            (window, pattern_str, alignment.counts.swapped_sides())
        };
        set.matches.push(FcaMatch {
            gt_segment,
            pred_segment,
            counts,
        });

        // The longer side's unaligned head and tail either become fresh
        // pool lines or count as unmatched outright.
        let remainders = [
            text[..alignment.start].to_vec(),
            text[alignment.end..].to_vec(),
        ];
        let text_origin = if gt_is_pattern {
            pred_pool[pi].key.0.clone()
        } else {
            gt_pool[gi].key.0.clone()
        };
        gt_pool[gi].alive = false;
        pred_pool[pi].alive = false;

        for raw in remainders {
            let (trimmed, dropped_ws) = trim_boundary_whitespace(raw);
            let (unmatched, dropped) = if gt_is_pattern {
                (&mut set.unmatched_pred_chars, &mut set.dropped_pred_boundary_spaces)
            } else {
                (&mut set.unmatched_gt_chars, &mut set.dropped_gt_boundary_spaces)
            };
            *dropped += dropped_ws;
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.len() >= params.min_split_length {
                let entry = PoolEntry {
                    key: (text_origin.clone(), next_fragment),
                    chars: trimmed,
                    alive: true,
                };
                next_fragment += 1;
                if gt_is_pattern {
                    for (g, row) in gt_pool.iter().zip(dist.iter_mut()) {
                        row.push(if g.alive {
                            pair_distance(&g.chars, &entry.chars)
                        } else {
                            u64::MAX
                        });
                    }
                    pred_pool.push(entry);
                } else {
                    dist.push(
                        pred_pool
                            .iter()
                            .map(|p| {
                                if p.alive {
                                    pair_distance(&entry.chars, &p.chars)
                                } else {
                                    u64::MAX
                                }
                            })
                            .collect(),
                    );
                    gt_pool.push(entry);
                }
            } else {
                *unmatched += trimmed.len() as u64;
            }
        }
    }

    // Whatever is still pooled when matching stops is unmatched in full.
    set.unmatched_gt_chars += gt_pool
        .iter()
        .filter(|e| e.alive)
        .map(|e| e.chars.len() as u64)
        .sum::<u64>();
    set.unmatched_pred_chars += pred_pool
        .iter()
        .filter(|e| e.alive)
        .map(|e| e.chars.len() as u64)
        .sum::<u64>();

    let pooled = set.pooled_counts();
    let metric = MetricValue {
        value: crr(&pooled).value.clamp(0.0, 1.0),
        counts: pooled,
    };
    (metric, set)
}

fn build_pool(page: &PageAnnotation, policy: &NormalizationPolicy) -> Vec<PoolEntry> {
    page.lines_in_order()
        .iter()
        .filter_map(|line| {
            let text = normalize_text(&line.text, policy);
            if text.is_empty() {
                None
            } else {
                Some(PoolEntry {
                    key: (line.id.clone(), 0),
                    chars: text.chars().collect(),
                    alive: true,
                })
            }
        })
        .collect()
}

fn pair_distance(g: &[char], p: &[char]) -> u64 {
    if g.len() <= p.len() {
        semi_global_distance(g, p)
    } else {
        semi_global_distance(p, g)
    }
}

/// Best alive pair by penalty, with the fixed tie-break rule. Penalties
/// are compared exactly via integer cross-products.
fn select_pair(
    gt_pool: &[PoolEntry],
    pred_pool: &[PoolEntry],
    dist: &[Vec<u64>],
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, u64, u64)> = None;
    for (gi, g) in gt_pool.iter().enumerate() {
        if !g.alive {
            continue;
        }
        for (pi, p) in pred_pool.iter().enumerate() {
            if !p.alive {
                continue;
            }
            let d = dist[gi][pi];
            let max_len = g.chars.len().max(p.chars.len()) as u64;
            let better = match best {
                None => true,
                Some((bgi, bpi, bd, bmax)) => {
                    use std::cmp::Ordering;
                    match (d * bmax).cmp(&(bd * max_len)) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => {
                            let bg = &gt_pool[bgi];
                            let bp = &pred_pool[bpi];
                            (
                                std::cmp::Reverse(g.chars.len()),
                                &g.key,
                                &p.key,
                            ) < (
                                std::cmp::Reverse(bg.chars.len()),
                                &bg.key,
                                &bp.key,
                            )
                        }
                    }
                }
            };
            if better {
                best = Some((gi, pi, d, max_len));
            }
        }
    }
    best.map(|(gi, pi, _, _)| (gi, pi))
}

fn trim_boundary_whitespace(mut chars: Vec<char>) -> (Vec<char>, u64) {
    let mut dropped = 0u64;
    while chars.last().is_some_and(|c| c.is_whitespace()) {
        chars.pop();
        dropped += 1;
    }
    let keep = chars
        .iter()
        .position(|c| !c.is_whitespace())
        .unwrap_or(chars.len());
    dropped += keep as u64;
    chars.drain(..keep);
    (chars, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TextLine;

    fn page(id: &str, texts: &[&str]) -> PageAnnotation {
        PageAnnotation {
            page_id: id.into(),
            image_ref: None,
            width: None,
            height: None,
            lines: texts
                .iter()
                .enumerate()
                .map(|(i, t)| TextLine::text_only(format!("l{i}"), i as u32, *t))
                .collect(),
        }
    }

    fn run(gt: &PageAnnotation, pred: &PageAnnotation) -> (MetricValue, FcaMatchSet) {
        fca(
            gt,
            pred,
            &NormalizationPolicy::default(),
            &FcaParams::default(),
        )
    }

    #[test]
    fn order_independent_by_construction() {
        let gt = page("p", &["first line here", "second line there"]);
        let mut pred = page("p", &["first line here", "second line there"]);
        pred.lines[0].order_index = 1;
        pred.lines[1].order_index = 0;
        let (value, _) = run(&gt, &pred);
        assert_eq!(value.value, 1.0);
    }

    #[test]
    fn split_prediction_scores_perfectly() {
        let gt = page("p", &["hello world"]);
        let pred = page("p", &["hello", "world"]);
        let (value, set) = run(&gt, &pred);
        assert_eq!(value.value, 1.0);
        assert_eq!(set.dropped_gt_boundary_spaces, 1);
        assert_eq!(set.unmatched_gt_chars, 0);
        assert_eq!(set.unmatched_pred_chars, 0);
    }

    #[test]
    fn merged_prediction_scores_perfectly() {
        let gt = page("p", &["hello", "world"]);
        let pred = page("p", &["hello world"]);
        let (value, set) = run(&gt, &pred);
        assert_eq!(value.value, 1.0);
        assert_eq!(set.dropped_pred_boundary_spaces, 1);
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let gt = page("p", &["abc"]);
        let pred = page("p", &[]);
        let (value, set) = run(&gt, &pred);
        assert_eq!(value.value, 0.0);
        assert_eq!(set.unmatched_gt_chars, 3);
    }

    #[test]
    fn empty_vs_empty_is_one() {
        let gt = page("p", &[]);
        let pred = page("p", &[]);
        let (value, _) = run(&gt, &pred);
        assert_eq!(value.value, 1.0);
    }

    #[test]
    fn clamped_to_unit_interval() {
        let gt = page("p", &["ab"]);
        let pred = page("p", &["zzzzzzzzzzzzzzzzzzzzzz", "qqqqqqqqqqqqqqqq"]);
        let (value, _) = run(&gt, &pred);
        assert!(value.value >= 0.0 && value.value <= 1.0);
    }

    #[test]
    fn character_accounting_is_exact() {
        let policy = NormalizationPolicy::default();
        let gt = page("p", &["the quick brown fox", "jumps over", "the lazy dog"]);
        let pred = page("p", &["the quick brown", "fox jumps over the", "lazy dog today"]);
        let (_, set) = run(&gt, &pred);
        let gt_total: u64 = gt
            .lines
            .iter()
            .map(|l| normalize_text(&l.text, &policy).chars().count() as u64)
            .sum();
        let pred_total: u64 = pred
            .lines
            .iter()
            .map(|l| normalize_text(&l.text, &policy).chars().count() as u64)
            .sum();
        assert_eq!(set.accounted_gt_chars(), gt_total);
        assert_eq!(set.accounted_pred_chars(), pred_total);
    }

    #[test]
    fn below_threshold_pairs_stay_unmatched() {
        let gt = page("p", &["aaaaaaaaaa"]);
        let pred = page("p", &["zzzzzzzzzz"]);
        let (value, set) = run(&gt, &pred);
        // Penalty 1.0 > 0.75, so nothing matches.
        assert!(set.matches.is_empty());
        assert_eq!(set.unmatched_gt_chars, 10);
        assert_eq!(set.unmatched_pred_chars, 10);
        assert_eq!(value.value, 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(FcaParams::new(0, 0.75).is_err());
        assert!(FcaParams::new(2, 0.0).is_err());
        assert!(FcaParams::new(2, 1.5).is_err());
        assert!(FcaParams::new(1, 1.0).is_ok());
    }
}
