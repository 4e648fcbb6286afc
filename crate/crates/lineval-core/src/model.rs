//! Domain types shared by every module: pages, text lines, and the
//! geometric primitives attached to them.
//!
//! All types are plain immutable values. Coordinates are real-valued pixels
//! with the origin at the top-left corner and y increasing downward.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in page space, in pixels.
///
/// Serializes as a two-element array `[x, y]` to match the page file format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for (f64, f64) {
    fn from(p: Point2) -> Self {
        (p.x, p.y)
    }
}

/// One annotated text line: transcription, optional polygon, and its
/// position in the page's reading order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub id: String,
    pub order_index: u32,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Point2>>,
}

impl TextLine {
    /// Line without geometry, as produced by text-only predictions.
    pub fn text_only(id: impl Into<String>, order_index: u32, text: impl Into<String>) -> Self {
        TextLine {
            id: id.into(),
            order_index,
            text: text.into(),
            polygon: None,
        }
    }
}

/// One page's line-level annotation, either ground truth or a prediction.
///
/// Ground-truth pages carry polygons and page dimensions; prediction pages
/// may omit both (external engines often emit text only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageAnnotation {
    #[serde(default)]
    pub page_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    pub lines: Vec<TextLine>,
}

impl PageAnnotation {
    pub fn empty(page_id: impl Into<String>) -> Self {
        PageAnnotation {
            page_id: page_id.into(),
            image_ref: None,
            width: None,
            height: None,
            lines: Vec::new(),
        }
    }

    /// Lines sorted by `order_index`; this is the page's reading order.
    pub fn lines_in_order(&self) -> Vec<&TextLine> {
        let mut lines: Vec<&TextLine> = self.lines.iter().collect();
        lines.sort_by_key(|l| l.order_index);
        lines
    }
}

/// A named set of pages with unique page ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub pages: Vec<PageAnnotation>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, pages: Vec<PageAnnotation>) -> Self {
        Corpus {
            name: name.into(),
            pages,
        }
    }

    pub fn page(&self, page_id: &str) -> Option<&PageAnnotation> {
        self.pages.iter().find(|p| p.page_id == page_id)
    }
}

/// Whether a page is ground truth or an engine prediction. Ground truth is
/// validated more strictly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageKind {
    GroundTruth,
    Prediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateLineId,
    DuplicateOrderIndex,
    MissingGeometry,
    MissingDimensions,
    DegeneratePolygon,
    SelfIntersectingPolygon,
    OutOfBoundsVertex,
    NonFiniteCoordinate,
}

/// One invariant breach found by [`validate_page`]. Violations are data,
/// not failures: callers decide whether to reject the page.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Line the violation is attached to, when it is line-scoped.
    pub line_id: Option<String>,
    pub detail: String,
}

impl Violation {
    fn page(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation {
            kind,
            line_id: None,
            detail: detail.into(),
        }
    }

    fn line(kind: ViolationKind, line_id: &str, detail: impl Into<String>) -> Self {
        Violation {
            kind,
            line_id: Some(line_id.to_string()),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.line_id {
            Some(id) => write!(f, "{:?} (line `{id}`): {}", self.kind, self.detail),
            None => write!(f, "{:?}: {}", self.kind, self.detail),
        }
    }
}

/// Check every invariant of a page and return all breaches.
///
/// Pure and idempotent. An empty result means the page is valid for the
/// given kind. Ground-truth pages must carry page dimensions and a polygon
/// on every line; prediction pages may omit geometry entirely.
pub fn validate_page(page: &PageAnnotation, kind: PageKind) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut id_counts: HashMap<&str, u32> = HashMap::new();
    let mut order_counts: HashMap<u32, u32> = HashMap::new();
    for line in &page.lines {
        *id_counts.entry(line.id.as_str()).or_default() += 1;
        *order_counts.entry(line.order_index).or_default() += 1;
    }
    let mut dup_ids: Vec<&str> = id_counts
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(&id, _)| id)
        .collect();
    dup_ids.sort_unstable();
    for id in dup_ids {
        violations.push(Violation::page(
            ViolationKind::DuplicateLineId,
            format!("line id `{id}` appears {} times", id_counts[id]),
        ));
    }
    let mut dup_orders: Vec<u32> = order_counts
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(&ix, _)| ix)
        .collect();
    dup_orders.sort_unstable();
    for ix in dup_orders {
        violations.push(Violation::page(
            ViolationKind::DuplicateOrderIndex,
            format!("order_index {ix} appears {} times", order_counts[&ix]),
        ));
    }

    if kind == PageKind::GroundTruth && (page.width.is_none() || page.height.is_none()) {
        violations.push(Violation::page(
            ViolationKind::MissingDimensions,
            "ground-truth page must declare width and height",
        ));
    }

    for line in &page.lines {
        match &line.polygon {
            None => {
                if kind == PageKind::GroundTruth {
                    violations.push(Violation::line(
                        ViolationKind::MissingGeometry,
                        &line.id,
                        "ground-truth line must carry a polygon",
                    ));
                }
            }
            Some(polygon) => {
                violations.extend(validate_polygon(polygon, line, page));
            }
        }
    }

    violations
}

fn validate_polygon(
    polygon: &[Point2],
    line: &TextLine,
    page: &PageAnnotation,
) -> Vec<Violation> {
    let mut violations = Vec::new();

    if polygon.iter().any(|p| !p.is_finite()) {
        violations.push(Violation::line(
            ViolationKind::NonFiniteCoordinate,
            &line.id,
            "polygon contains a non-finite coordinate",
        ));
        return violations;
    }

    if polygon.len() < 3 {
        violations.push(Violation::line(
            ViolationKind::DegeneratePolygon,
            &line.id,
            format!("polygon has {} vertices, need at least 3", polygon.len()),
        ));
        return violations;
    }
    for w in polygon.windows(2) {
        if w[0] == w[1] {
            violations.push(Violation::line(
                ViolationKind::DegeneratePolygon,
                &line.id,
                "polygon repeats consecutive vertices",
            ));
            return violations;
        }
    }

    if let (Some(width), Some(height)) = (page.width, page.height) {
        let (w, h) = (width as f64, height as f64);
        if polygon
            .iter()
            .any(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h)
        {
            violations.push(Violation::line(
                ViolationKind::OutOfBoundsVertex,
                &line.id,
                format!("vertex outside page bounds {width}x{height}"),
            ));
        }
    } else if polygon.iter().any(|p| p.x < 0.0 || p.y < 0.0) {
        violations.push(Violation::line(
            ViolationKind::OutOfBoundsVertex,
            &line.id,
            "negative coordinate",
        ));
    }

    if !is_simple_polygon(polygon) {
        violations.push(Violation::line(
            ViolationKind::SelfIntersectingPolygon,
            &line.id,
            "polygon edges intersect",
        ));
    }

    violations
}

/// True when no two non-adjacent edges of the closed polygon intersect.
fn is_simple_polygon(polygon: &[Point2]) -> bool {
    let n = polygon.len();
    for i in 0..n {
        let a1 = polygon[i];
        let a2 = polygon[(i + 1) % n];
        for j in (i + 1)..n {
            // Skip the edge itself and the two edges sharing a vertex with it.
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let b1 = polygon[j];
            let b2 = polygon[(j + 1) % n];
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
    let d1 = orientation(a1, a2, b1);
    let d2 = orientation(a1, a2, b2);
    let d3 = orientation(b1, b2, a1);
    let d4 = orientation(b1, b2, a2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a1, a2, b1))
        || (d2 == 0.0 && on_segment(a1, a2, b2))
        || (d3 == 0.0 && on_segment(b1, b2, a1))
        || (d4 == 0.0 && on_segment(b1, b2, a2))
}

/// Vertex centroid of a line's polygon: the arithmetic mean of its
/// vertices, not the area centroid.
pub fn line_centroid(line: &TextLine) -> Result<Point2> {
    let polygon = line
        .polygon
        .as_deref()
        .filter(|p| p.len() >= 3)
        .ok_or_else(|| Error::MissingGeometry(line.id.clone()))?;
    let n = polygon.len() as f64;
    let (sx, sy) = polygon
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Ok(Point2::new(sx / n, sy / n))
}
