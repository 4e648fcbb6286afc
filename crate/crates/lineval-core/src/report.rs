//! Evaluation reports: the machine-readable comparison tables, emitted as
//! CSV, Markdown, or JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fca::FcaParams;
use crate::normalize::NormalizationPolicy;

/// Everything needed to reproduce one evaluation run. The digest pins the
/// configuration so reports from different settings are never comparable
/// by accident.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub policy: String,
    pub strategy: String,
    pub tau: Option<f64>,
    pub fca_min_split_length: usize,
    pub fca_max_match_penalty: f64,
    pub excluded_stages: Vec<String>,
    pub digest: String,
}

impl ReportConfig {
    pub fn new(
        policy: &NormalizationPolicy,
        strategy_label: &str,
        tau: Option<f64>,
        fca_params: &FcaParams,
        excluded_stages: Vec<String>,
    ) -> Self {
        let mut config = ReportConfig {
            policy: policy.summary(),
            strategy: strategy_label.to_string(),
            tau,
            fca_min_split_length: fca_params.min_split_length,
            fca_max_match_penalty: fca_params.max_match_penalty,
            excluded_stages,
            digest: String::new(),
        };
        let fingerprint = format!(
            "{}|{}|{:?}|{}|{}|{}",
            config.policy,
            config.strategy,
            config.tau,
            config.fca_min_split_length,
            config.fca_max_match_penalty,
            config.excluded_stages.join(",")
        );
        config.digest = hex::encode(&Sha256::digest(fingerprint.as_bytes())[..8]);
        config
    }
}

/// Per-page evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRow {
    pub page_id: String,
    pub crr: f64,
    pub fca: f64,
    /// Normalized ground-truth character count (page text with separators);
    /// the aggregation weight.
    pub gt_chars: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    #[serde(default)]
    pub engine_failed: bool,
}

/// Corpus-level roll-up for one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub weighted_crr: f64,
    pub unweighted_crr: f64,
    pub weighted_fca: f64,
    pub unweighted_fca: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_seconds: Option<f64>,
    pub pages: usize,
    pub engine_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSection {
    pub engine: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_label: Option<String>,
    pub pages: Vec<PageRow>,
    pub corpus: CorpusRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    pub engines: Vec<EngineSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Serialize a report. Output is byte-deterministic for equal reports.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .expect("report serialization cannot fail");
            s.push('\n');
            s
        }
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

/// Write a report to a file.
pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, render_report(report, format))?;
    Ok(())
}

/// Parse a JSON report back; inverse of `render_report(_, Json)`.
pub fn parse_report(json: &str) -> Result<EvalReport> {
    serde_json::from_str(json).map_err(|e| Error::Parse {
        path: "<report json>".into(),
        detail: e.to_string(),
    })
}

/// Quote a CSV field when it contains a delimiter, quote, or newline.
pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One CSV row per (page, engine); corpus rows carry the page_id `*`.
fn render_csv(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("config_digest,engine,strategy,page_id,crr,fca,gt_chars,seconds,engine_failed\n");
    let digest = &report.config.digest;
    let strategy = csv_escape(&report.config.strategy);
    for section in &report.engines {
        let engine = csv_escape(&section.engine);
        for row in &section.pages {
            let _ = writeln!(
                out,
                "{digest},{engine},{strategy},{},{},{},{},{},{}",
                csv_escape(&row.page_id),
                row.crr,
                row.fca,
                row.gt_chars,
                row.seconds.map(|s| s.to_string()).unwrap_or_default(),
                row.engine_failed
            );
        }
        let corpus = &section.corpus;
        let _ = writeln!(
            out,
            "{digest},{engine},{strategy},*,{},{},{},{},{}",
            corpus.weighted_crr,
            corpus.weighted_fca,
            corpus.pages,
            corpus.mean_seconds.map(|s| s.to_string()).unwrap_or_default(),
            corpus.engine_failures
        );
    }
    out
}

/// Engine names of the form `detector+recognizer` split across the first
/// two columns; single-stage engines show `-` as the detector.
fn split_engine_name(name: &str) -> (String, String) {
    match name.split_once('+') {
        Some((detector, recognizer)) => (detector.to_string(), recognizer.to_string()),
        None => ("-".to_string(), name.to_string()),
    }
}

fn render_markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("| Detector | Recognizer | CRR | Flex Character Acc. | Seconds/page |\n");
    out.push_str("|---|---|---|---|---|\n");
    for section in &report.engines {
        let (detector, recognizer) = split_engine_name(&section.engine);
        let corpus = &section.corpus;
        let seconds = corpus
            .mean_seconds
            .map(|s| format!("{s:.2}"))
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "| {detector} | {recognizer} | {:.2} | {:.2} | {seconds} |",
            100.0 * corpus.weighted_crr,
            100.0 * corpus.weighted_fca,
        );
    }
    let config = &report.config;
    let _ = write!(
        out,
        "\nConfig `{}`: policy={}, strategy={}, tau={}, fca=({}, {}), excluded_stages=[{}]\n",
        config.digest,
        config.policy,
        config.strategy,
        config
            .tau
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".to_string()),
        config.fca_min_split_length,
        config.fca_max_match_penalty,
        config.excluded_stages.join(", ")
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> EvalReport {
        let config = ReportConfig::new(
            &NormalizationPolicy::default(),
            "as_is",
            None,
            &FcaParams::default(),
            vec![],
        );
        EvalReport {
            config,
            engines: vec![EngineSection {
                engine: "boxfind+linereader".into(),
                stage_label: Some("detection+recognition".into()),
                pages: vec![PageRow {
                    page_id: "p1".into(),
                    crr: 0.8112,
                    fca: 0.9473,
                    gt_chars: 1520,
                    seconds: Some(1.73),
                    engine_failed: false,
                }],
                corpus: CorpusRow {
                    weighted_crr: 0.8112,
                    unweighted_crr: 0.8112,
                    weighted_fca: 0.9473,
                    unweighted_fca: 0.9473,
                    mean_seconds: Some(1.73),
                    pages: 1,
                    engine_failures: 0,
                },
            }],
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let report = sample_report();
        let json = render_report(&report, ReportFormat::Json);
        let back = parse_report(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn emission_is_byte_deterministic() {
        let report = sample_report();
        for format in [ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json] {
            assert_eq!(
                render_report(&report, format),
                render_report(&report, format)
            );
        }
    }

    #[test]
    fn markdown_columns_follow_table_order() {
        let md = render_report(&sample_report(), ReportFormat::Markdown);
        let header = md.lines().next().unwrap();
        assert_eq!(
            header,
            "| Detector | Recognizer | CRR | Flex Character Acc. | Seconds/page |"
        );
        assert!(md.contains("| boxfind | linereader | 81.12 | 94.73 | 1.73 |"));
        assert!(md.contains("Config `"));
    }

    #[test]
    fn csv_has_one_row_per_page_plus_corpus() {
        let csv = render_report(&sample_report(), ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3); // header + 1 page + corpus row
        assert!(lines[1].contains("p1"));
        assert!(lines[2].contains(",*,"));
    }

    #[test]
    fn markdown_lists_every_engine() {
        let mut report = sample_report();
        let mut second = report.engines[0].clone();
        second.engine = "linereader".into();
        report.engines.push(second);
        let md = render_report(&report, ReportFormat::Markdown);
        let body_rows = md.lines().filter(|l| l.starts_with("| ") && !l.contains("Detector")).count();
        assert_eq!(body_rows, 2);
        assert!(md.contains("| - | linereader |"));
    }

    #[test]
    fn config_digest_distinguishes_settings() {
        let a = ReportConfig::new(
            &NormalizationPolicy::default(),
            "as_is",
            None,
            &FcaParams::default(),
            vec![],
        );
        let b = ReportConfig::new(
            &NormalizationPolicy::default(),
            "ref(tau=0.9)",
            Some(0.9),
            &FcaParams::default(),
            vec![],
        );
        assert_ne!(a.digest, b.digest);
    }

    #[test]
    fn csv_escaping() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn engine_name_splitting() {
        assert_eq!(
            split_engine_name("boxfind+linereader"),
            ("boxfind".into(), "linereader".into())
        );
        assert_eq!(split_engine_name("linereader"), ("-".into(), "linereader".into()));
    }
}
