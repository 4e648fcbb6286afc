//! Reading and writing annotation corpora.
//!
//! A corpus is a directory of UTF-8 page files. The native format is one
//! JSON page per file:
//!
//! ```json
//! {
//!   "page_id": "p001",
//!   "image_ref": "p001.png",
//!   "width": 1200,
//!   "height": 1800,
//!   "lines": [
//!     {"id": "l0", "order_index": 0, "text": "first line",
//!      "polygon": [[10.0, 12.0], [400.0, 12.0], [400.0, 40.0], [10.0, 40.0]]}
//!   ]
//! }
//! ```
//!
//! `page_id` defaults to the file stem when absent; `image_ref`, `width`,
//! `height`, and per-line `polygon` are optional for predictions. For
//! prediction corpora a plain `.txt` file is also accepted: its physical
//! lines become text-only lines in file order.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{validate_page, Corpus, PageAnnotation, PageKind, TextLine};

/// Parse one page file, JSON or (for predictions) plain text, picking the
/// format by extension.
pub fn load_page(path: &Path, kind: PageKind) -> Result<PageAnnotation> {
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase();
    match extension.as_str() {
        "json" => load_page_json(path),
        "txt" if kind == PageKind::Prediction => load_page_txt(path),
        other => Err(Error::Parse {
            path: path.to_path_buf(),
            detail: format!("unsupported page file extension `{other}`"),
        }),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn load_page_json(path: &Path) -> Result<PageAnnotation> {
    let raw = fs::read_to_string(path)?;
    let mut page: PageAnnotation = serde_json::from_str(&raw).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        detail: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    if page.page_id.is_empty() {
        page.page_id = file_stem(path);
    }
    Ok(page)
}

/// Plain-text prediction fallback: physical lines in file order, no
/// geometry.
fn load_page_txt(path: &Path) -> Result<PageAnnotation> {
    let raw = fs::read_to_string(path)?;
    let lines = raw
        .lines()
        .enumerate()
        .map(|(i, text)| TextLine::text_only(i.to_string(), i as u32, text))
        .collect();
    Ok(PageAnnotation {
        page_id: file_stem(path),
        image_ref: None,
        width: None,
        height: None,
        lines,
    })
}

/// Parse raw engine output that may be either the JSON page format or
/// plain text.
pub fn parse_prediction_output(path: &Path) -> Result<PageAnnotation> {
    let raw = fs::read_to_string(path)?;
    if raw.trim_start().starts_with('{') {
        if let Ok(mut page) = serde_json::from_str::<PageAnnotation>(&raw) {
            if page.page_id.is_empty() {
                page.page_id = file_stem(path);
            }
            return Ok(page);
        }
    }
    load_page_txt(path)
}

/// Load a corpus from a directory of page files.
///
/// Every page must pass validation for its kind; any breach aborts the
/// load with the full violation list. Pages are returned sorted by
/// `page_id`, and duplicate page ids are rejected.
pub fn load_corpus(dir: &Path, kind: PageKind) -> Result<Corpus> {
    if !dir.is_dir() {
        return Err(Error::Parse {
            path: dir.to_path_buf(),
            detail: "expected a directory of page files".into(),
        });
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|path| {
            let ext = path
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or_default()
                .to_ascii_lowercase();
            path.is_file() && (ext == "json" || (ext == "txt" && kind == PageKind::Prediction))
        })
        .collect();
    paths.sort();

    let mut pages = Vec::with_capacity(paths.len());
    for path in &paths {
        let page = load_page(path, kind)?;
        let violations = validate_page(&page, kind);
        if !violations.is_empty() {
            return Err(Error::Validation {
                context: format!("page `{}` ({})", page.page_id, path.display()),
                violations,
            });
        }
        pages.push(page);
    }

    pages.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    for pair in pages.windows(2) {
        if pair[0].page_id == pair[1].page_id {
            return Err(Error::Validation {
                context: format!("corpus {}", dir.display()),
                violations: vec![],
            });
        }
    }

    Ok(Corpus::new(file_stem(dir), pages))
}

/// Write a corpus as one pretty-printed JSON page file per page, named
/// `<page_id>.json`. `load_corpus` of the written directory restores the
/// corpus exactly (given the directory is named after the corpus).
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for page in &corpus.pages {
        let path = dir.join(format!("{}.json", page.page_id));
        let json = serde_json::to_string_pretty(page).expect("page serialization cannot fail");
        fs::write(path, json)?;
    }
    Ok(())
}
