//! Reading-order strategies for predicted lines: geometric blind ordering
//! and reference-guided reordering by edit similarity.

use serde::{Deserialize, Serialize};

use crate::align::levenshtein_chars;
use crate::error::{Error, Result};
use crate::model::{line_centroid, PageAnnotation};

pub const DEFAULT_TAU: f64 = 0.90;
pub const DEFAULT_ROW_OVERLAP_THRESHOLD: f64 = 0.5;

/// How prediction lines are ordered before page-level scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderingStrategy {
    /// Keep the engine's own reading order.
    AsIs,
    /// Geometric ordering by line centroid: rows top to bottom, lines left
    /// to right within a row. Requires geometry on every line.
    BlindCentroid { row_overlap_threshold: f64 },
    /// Reorder to follow a reference transcript wherever edit similarity
    /// reaches `tau`.
    ReferenceGuided { tau: f64 },
}

impl OrderingStrategy {
    pub fn blind() -> Self {
        OrderingStrategy::BlindCentroid {
            row_overlap_threshold: DEFAULT_ROW_OVERLAP_THRESHOLD,
        }
    }

    pub fn reference_guided() -> Self {
        OrderingStrategy::ReferenceGuided { tau: DEFAULT_TAU }
    }

    pub fn label(&self) -> String {
        match self {
            OrderingStrategy::AsIs => "as_is".to_string(),
            OrderingStrategy::BlindCentroid { .. } => "blind".to_string(),
            OrderingStrategy::ReferenceGuided { tau } => format!("ref(tau={tau})"),
        }
    }
}

/// One argmin scan of the reference-guided reorder, for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Position of the reference line in its reading order.
    pub reference_index: usize,
    /// Position of the best-matching prediction line in the input reading
    /// order.
    pub pred_index: usize,
    pub similarity: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReorderTrace {
    pub entries: Vec<TraceEntry>,
}

/// Blind geometric ordering.
///
/// Lines are grouped into rows (two lines share a row when their vertical
/// extents overlap by at least `row_overlap_threshold` of the smaller
/// extent, taking connected components of that relation), rows are sorted
/// by mean centroid y, and lines within a row by centroid x. Only
/// `order_index` changes; text and geometry pass through untouched.
pub fn order_blind(page: &PageAnnotation, row_overlap_threshold: f64) -> Result<PageAnnotation> {
    let lines = page.lines_in_order();
    let n = lines.len();
    if n == 0 {
        return Ok(page.clone());
    }

    let mut centroids = Vec::with_capacity(n);
    let mut extents = Vec::with_capacity(n);
    for line in &lines {
        let c = line_centroid(line)?;
        let polygon = line
            .polygon
            .as_deref()
            .ok_or_else(|| Error::MissingGeometry(line.id.clone()))?;
        let min_y = polygon.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = polygon
            .iter()
            .map(|p| p.y)
            .fold(f64::NEG_INFINITY, f64::max);
        centroids.push(c);
        extents.push((min_y, max_y));
    }

    // Union lines that share a row.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a0, a1) = extents[i];
            let (b0, b1) = extents[j];
            let overlap = (a1.min(b1) - a0.max(b0)).max(0.0);
            let smaller = (a1 - a0).min(b1 - b0);
            let share_row = if smaller <= 0.0 {
                overlap > 0.0 || a0.max(b0) <= a1.min(b1)
            } else {
                overlap >= row_overlap_threshold * smaller
            };
            if share_row {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut rows: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut root_row: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let row = *root_row.entry(root).or_insert_with(|| {
            rows.push((0.0, Vec::new()));
            rows.len() - 1
        });
        rows[row].1.push(i);
    }
    for (mean_y, members) in rows.iter_mut() {
        *mean_y = members.iter().map(|&i| centroids[i].y).sum::<f64>() / members.len() as f64;
        // Left to right within the row; reading-order position breaks x ties,
        // which also makes the ordering idempotent.
        members.sort_by(|&a, &b| {
            centroids[a]
                .x
                .partial_cmp(&centroids[b].x)
                .unwrap()
                .then(a.cmp(&b))
        });
    }
    rows.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1[0].cmp(&b.1[0]))
    });

    let mut reordered = page.clone();
    reordered.lines = Vec::with_capacity(n);
    let mut next_index = 0u32;
    for (_, members) in rows {
        for i in members {
            let mut line = lines[i].clone();
            line.order_index = next_index;
            next_index += 1;
            reordered.lines.push(line);
        }
    }
    Ok(reordered)
}

/// Reference-guided reordering.
///
/// For each reference line in reading order, the closest not-yet-accepted
/// prediction line by unit-cost edit distance is found; when its similarity
/// `1 - D / max(|R|, |K|)` reaches `tau`, it is moved to the reference
/// line's position. Accepted lines are excluded from later scans so every
/// prediction line is accepted at most once; unaccepted lines keep their
/// relative order. Texts must already be normalized consistently with the
/// reference for `tau` to be meaningful.
pub fn order_by_reference(
    reference: &PageAnnotation,
    pred: &PageAnnotation,
    tau: f64,
) -> (PageAnnotation, ReorderTrace) {
    let ref_lines = reference.lines_in_order();
    let pred_lines = pred.lines_in_order();
    let pred_chars: Vec<Vec<char>> = pred_lines
        .iter()
        .map(|l| l.text.chars().collect())
        .collect();

    // Working order holds indices into `pred_lines`.
    let mut working: Vec<usize> = (0..pred_lines.len()).collect();
    let mut accepted = vec![false; pred_lines.len()];
    let mut trace = ReorderTrace::default();

    for (ref_index, ref_line) in ref_lines.iter().enumerate() {
        let ref_chars: Vec<char> = ref_line.text.chars().collect();
        let mut best: Option<(usize, u64)> = None; // (position in working, distance)
        for (pos, &orig) in working.iter().enumerate() {
            if accepted[orig] {
                continue;
            }
            let d = levenshtein_chars(&ref_chars, &pred_chars[orig]);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((pos, d));
            }
        }
        let Some((pos, d)) = best else {
            continue; // every prediction line already accepted
        };
        let orig = working[pos];
        let max_len = ref_chars.len().max(pred_chars[orig].len());
        let similarity = if max_len == 0 {
            1.0
        } else {
            1.0 - d as f64 / max_len as f64
        };
        let accept = similarity >= tau;
        trace.entries.push(TraceEntry {
            reference_index: ref_index,
            pred_index: orig,
            similarity,
            accepted: accept,
        });
        if accept {
            accepted[orig] = true;
            working.remove(pos);
            let insert_at = ref_index.min(working.len());
            working.insert(insert_at, orig);
        }
    }

    let mut reordered = pred.clone();
    reordered.lines = working
        .iter()
        .enumerate()
        .map(|(new_index, &orig)| {
            let mut line = pred_lines[orig].clone();
            line.order_index = new_index as u32;
            line
        })
        .collect();
    (reordered, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point2, TextLine};

    fn geo_line(id: &str, order_index: u32, x0: f64, y0: f64, w: f64, h: f64) -> TextLine {
        TextLine {
            id: id.into(),
            order_index,
            text: format!("text {id}"),
            polygon: Some(vec![
                Point2::new(x0, y0),
                Point2::new(x0 + w, y0),
                Point2::new(x0 + w, y0 + h),
                Point2::new(x0, y0 + h),
            ]),
        }
    }

    fn text_page(texts: &[&str]) -> PageAnnotation {
        PageAnnotation {
            page_id: "p".into(),
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

    fn ordered_ids(page: &PageAnnotation) -> Vec<String> {
        page.lines_in_order()
            .iter()
            .map(|l| l.id.clone())
            .collect()
    }

    #[test]
    fn blind_sorts_stacked_lines_top_down() {
        let mut page = PageAnnotation::empty("p");
        page.lines = vec![
            geo_line("lower", 0, 0.0, 50.0, 100.0, 10.0),
            geo_line("upper", 1, 0.0, 10.0, 100.0, 10.0),
        ];
        let out = order_blind(&page, DEFAULT_ROW_OVERLAP_THRESHOLD).unwrap();
        assert_eq!(ordered_ids(&out), vec!["upper", "lower"]);
    }

    #[test]
    fn blind_sorts_within_row_left_to_right() {
        let mut page = PageAnnotation::empty("p");
        page.lines = vec![
            geo_line("right", 0, 60.0, 10.0, 30.0, 10.0),
            geo_line("left", 1, 0.0, 10.0, 30.0, 10.0),
        ];
        let out = order_blind(&page, DEFAULT_ROW_OVERLAP_THRESHOLD).unwrap();
        assert_eq!(ordered_ids(&out), vec!["left", "right"]);
    }

    #[test]
    fn blind_interleaves_two_columns_row_by_row() {
        // Known limitation of blind ordering: columns interleave.
        let mut page = PageAnnotation::empty("p");
        page.lines = vec![
            geo_line("c1r1", 0, 0.0, 0.0, 40.0, 10.0),
            geo_line("c1r2", 1, 0.0, 20.0, 40.0, 10.0),
            geo_line("c2r1", 2, 60.0, 0.0, 40.0, 10.0),
            geo_line("c2r2", 3, 60.0, 20.0, 40.0, 10.0),
        ];
        let out = order_blind(&page, DEFAULT_ROW_OVERLAP_THRESHOLD).unwrap();
        assert_eq!(ordered_ids(&out), vec!["c1r1", "c2r1", "c1r2", "c2r2"]);
    }

    #[test]
    fn blind_requires_geometry() {
        let page = text_page(&["no geometry"]);
        assert!(matches!(
            order_blind(&page, 0.5),
            Err(Error::MissingGeometry(_))
        ));
    }

    #[test]
    fn blind_is_idempotent() {
        let mut page = PageAnnotation::empty("p");
        page.lines = vec![
            geo_line("a", 0, 50.0, 30.0, 30.0, 10.0),
            geo_line("b", 1, 0.0, 31.0, 30.0, 10.0),
            geo_line("c", 2, 0.0, 5.0, 80.0, 10.0),
        ];
        let once = order_blind(&page, 0.5).unwrap();
        let twice = order_blind(&once, 0.5).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn reference_restores_exact_permutation() {
        let reference = text_page(&["alpha line", "bravo line", "charlie line"]);
        let mut pred = text_page(&["alpha line", "bravo line", "charlie line"]);
        // Present them as [charlie, alpha, bravo].
        pred.lines[0].order_index = 1;
        pred.lines[1].order_index = 2;
        pred.lines[2].order_index = 0;
        let (out, trace) = order_by_reference(&reference, &pred, 0.9);
        let texts: Vec<&str> = out
            .lines_in_order()
            .iter()
            .map(|l| l.text.as_str())
            .collect();
        assert_eq!(texts, vec!["alpha line", "bravo line", "charlie line"]);
        assert!(trace.entries.iter().all(|e| e.accepted && e.similarity == 1.0));
    }

    #[test]
    fn near_match_above_tau_is_moved() {
        let reference = text_page(&["twenty characters ab"]);
        let pred = text_page(&["filler filler filler", "twenty characters aX"]);
        let (_, trace) = order_by_reference(&reference, &pred, 0.9);
        let entry = &trace.entries[0];
        assert_eq!(entry.pred_index, 1);
        assert!((entry.similarity - 0.95).abs() < 1e-12);
        assert!(entry.accepted);
    }

    #[test]
    fn below_tau_is_recorded_but_not_moved() {
        let reference = text_page(&["aaaaaaaaaa"]);
        let pred = text_page(&["bbbbbaaaaa", "cccccccccc"]);
        let (out, trace) = order_by_reference(&reference, &pred, 0.9);
        let entry = &trace.entries[0];
        assert!(!entry.accepted);
        assert!((entry.similarity - 0.5).abs() < 1e-12);
        assert_eq!(ordered_ids(&out), ordered_ids(&pred));
    }

    #[test]
    fn unaccepted_lines_keep_relative_order() {
        let reference = text_page(&["match me please now"]);
        let pred = text_page(&["zebra", "match me please now", "yak"]);
        let (out, _) = order_by_reference(&reference, &pred, 0.9);
        assert_eq!(ordered_ids(&out), vec!["l1", "l0", "l2"]);
    }

    #[test]
    fn preserves_line_multiset() {
        let reference = text_page(&["one", "two", "three"]);
        let mut pred = text_page(&["three", "one", "two"]);
        pred.lines[1].polygon = Some(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        ]);
        let (out, _) = order_by_reference(&reference, &pred, 0.9);
        let mut before: Vec<_> = pred
            .lines
            .iter()
            .map(|l| (l.id.clone(), l.text.clone(), l.polygon.clone()))
            .collect();
        let mut after: Vec<_> = out
            .lines
            .iter()
            .map(|l| (l.id.clone(), l.text.clone(), l.polygon.clone()))
            .collect();
        before.sort_by(|a, b| a.0.cmp(&b.0));
        after.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(before, after);
    }

    #[test]
    fn empty_pages_pass_through() {
        let empty = text_page(&[]);
        let pred = text_page(&["something"]);
        let (out, trace) = order_by_reference(&empty, &pred, 0.9);
        assert_eq!(out, pred);
        assert!(trace.entries.is_empty());
        let (out, _) = order_by_reference(&pred, &empty, 0.9);
        assert_eq!(out.lines.len(), 0);
    }
}
