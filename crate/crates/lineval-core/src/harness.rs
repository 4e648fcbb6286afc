//! Benchmark orchestration: run external OCR engines on page images via a
//! subprocess contract, time them per page, and score predictions against
//! ground truth under a chosen ordering strategy.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::fca::{fca, FcaParams};
use crate::ingest::parse_prediction_output;
use crate::metrics::{aggregate, page_crr, page_text};
use crate::model::{Corpus, PageAnnotation, TextLine};
use crate::normalize::{normalize_text, NormalizationPolicy};
use crate::order::{order_blind, order_by_reference, OrderingStrategy};
use crate::report::{CorpusRow, EngineSection, EvalReport, PageRow, ReportConfig};

/// Which pipeline stages an engine's command covers. Timing exclusions are
/// declared per stage name because foreign engines cannot be instrumented
/// from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageLabel {
    #[serde(rename = "detection+recognition")]
    DetectionRecognition,
    #[serde(rename = "recognition_only")]
    RecognitionOnly,
}

impl StageLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageLabel::DetectionRecognition => "detection+recognition",
            StageLabel::RecognitionOnly => "recognition_only",
        }
    }
}

/// A black-box OCR engine driven through a command template.
///
/// The template must contain the `{input_image}` and `{output_file}`
/// placeholders exactly once each; it is split on whitespace and the
/// placeholders are substituted per token, so paths with spaces are not
/// supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineAdapter {
    pub name: String,
    pub command_template: String,
    pub timeout_secs: u64,
    pub stage_label: StageLabel,
}

impl EngineAdapter {
    pub fn validate(&self) -> Result<()> {
        for placeholder in ["{input_image}", "{output_file}"] {
            let count = self.command_template.matches(placeholder).count();
            if count != 1 {
                return Err(Error::AdapterConfig {
                    name: self.name.clone(),
                    detail: format!(
                        "command template must contain {placeholder} exactly once, found {count}"
                    ),
                });
            }
        }
        if self.command_template.split_whitespace().next().is_none() {
            return Err(Error::AdapterConfig {
                name: self.name.clone(),
                detail: "command template is empty".into(),
            });
        }
        Ok(())
    }

    fn build_argv(&self, input_image: &Path, output_file: &Path) -> Vec<String> {
        self.command_template
            .split_whitespace()
            .map(|token| {
                token
                    .replace("{input_image}", &input_image.to_string_lossy())
                    .replace("{output_file}", &output_file.to_string_lossy())
            })
            .collect()
    }
}

/// Wall-clock seconds for one page, broken down by stage. The reported
/// per-page time is the sum over stages not listed in `excluded_stages`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub page_id: String,
    pub stages: Vec<(String, f64)>,
    #[serde(default)]
    pub excluded_stages: Vec<String>,
}

impl TimingRecord {
    pub fn reported_seconds(&self) -> f64 {
        self.stages
            .iter()
            .filter(|(stage, _)| !self.excluded_stages.contains(stage))
            .map(|(_, secs)| secs)
            .sum()
    }
}

/// A page-level engine failure; the page still scores (as empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineFailure {
    pub page_id: String,
    pub reason: String,
}

/// Everything one engine run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineRun {
    pub predictions: Corpus,
    pub timings: Vec<TimingRecord>,
    pub failures: Vec<EngineFailure>,
}

/// Run an engine over every page of `pages` (which must carry
/// `image_ref`s, resolved relative to `image_root` when relative).
///
/// Pages fan out to at most `jobs` concurrent engine invocations. A page
/// whose command fails, times out, or emits unreadable output yields an
/// empty prediction page plus a failure record; the run never aborts on
/// page-level trouble.
pub fn run_engine(
    adapter: &EngineAdapter,
    pages: &Corpus,
    image_root: &Path,
    work_dir: &Path,
    jobs: usize,
) -> Result<EngineRun> {
    adapter.validate()?;
    std::fs::create_dir_all(work_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool construction cannot fail");

    let outcomes: Vec<(PageAnnotation, TimingRecord, Option<EngineFailure>)> = pool.install(|| {
        pages
            .pages
            .par_iter()
            .map(|page| run_engine_page(adapter, page, image_root, work_dir))
            .collect()
    });

    let mut predictions = Vec::with_capacity(outcomes.len());
    let mut timings = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (page, timing, failure) in outcomes {
        predictions.push(page);
        timings.push(timing);
        failures.extend(failure);
    }
    Ok(EngineRun {
        predictions: Corpus::new(format!("{}-predictions", adapter.name), predictions),
        timings,
        failures,
    })
}

fn run_engine_page(
    adapter: &EngineAdapter,
    page: &PageAnnotation,
    image_root: &Path,
    work_dir: &Path,
) -> (PageAnnotation, TimingRecord, Option<EngineFailure>) {
    let stage = adapter.stage_label.as_str().to_string();
    let mut timing = TimingRecord {
        page_id: page.page_id.clone(),
        stages: vec![(stage, 0.0)],
        excluded_stages: vec![],
    };
    let fail = |reason: String, timing: TimingRecord| {
        (
            PageAnnotation::empty(&page.page_id),
            timing,
            Some(EngineFailure {
                page_id: page.page_id.clone(),
                reason,
            }),
        )
    };

    let Some(image_ref) = &page.image_ref else {
        return fail("page has no image_ref".into(), timing);
    };
    let image_path = {
        let p = PathBuf::from(image_ref);
        if p.is_absolute() {
            p
        } else {
            image_root.join(p)
        }
    };
    let output_file = work_dir.join(format!("{}.out", page.page_id));
    let argv = adapter.build_argv(&image_path, &output_file);

    let started = Instant::now();
    let mut child = match Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(child) => child,
        Err(e) => {
            timing.stages[0].1 = started.elapsed().as_secs_f64();
            return fail(format!("failed to spawn `{}`: {e}", argv[0]), timing);
        }
    };
    let status = match child.wait_timeout(Duration::from_secs(adapter.timeout_secs)) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            timing.stages[0].1 = started.elapsed().as_secs_f64();
            return fail(
                format!("timed out after {}s", adapter.timeout_secs),
                timing,
            );
        }
        Err(e) => {
            timing.stages[0].1 = started.elapsed().as_secs_f64();
            return fail(format!("wait failed: {e}"), timing);
        }
    };
    timing.stages[0].1 = started.elapsed().as_secs_f64();

    if !status.success() {
        return fail(format!("engine exited with {status}"), timing);
    }
    match parse_prediction_output(&output_file) {
        Ok(mut prediction) => {
            prediction.page_id = page.page_id.clone();
            (prediction, timing, None)
        }
        Err(e) => fail(format!("unreadable engine output: {e}"), timing),
    }
}

/// Inputs for [`evaluate`] beyond the two corpora.
pub struct EvalOptions<'a> {
    pub policy: &'a NormalizationPolicy,
    pub strategy: OrderingStrategy,
    pub fca_params: FcaParams,
    /// Reference corpus for reference-guided ordering; ground truth when
    /// absent.
    pub reference: Option<&'a Corpus>,
    pub timings: &'a [TimingRecord],
    pub excluded_stages: &'a [String],
    /// Page ids that failed engine-side, flagged in the report.
    pub failed_pages: &'a [String],
    pub engine_name: String,
    pub stage_label: Option<String>,
}

impl<'a> EvalOptions<'a> {
    pub fn new(policy: &'a NormalizationPolicy, engine_name: impl Into<String>) -> Self {
        EvalOptions {
            policy,
            strategy: OrderingStrategy::AsIs,
            fca_params: FcaParams::default(),
            reference: None,
            timings: &[],
            excluded_stages: &[],
            failed_pages: &[],
            engine_name: engine_name.into(),
            stage_label: None,
        }
    }
}

/// Score a prediction corpus against ground truth.
///
/// Every ground-truth page is scored exactly once; prediction pages must
/// be a subset of ground-truth pages by id, and missing ones score as
/// empty pages rather than being skipped. The chosen ordering strategy is
/// applied to each prediction page before the order-sensitive CRR; FCA is
/// unaffected by ordering by construction.
pub fn evaluate(gt: &Corpus, pred: &Corpus, options: &EvalOptions) -> Result<EvalReport> {
    for page in &pred.pages {
        if gt.page(&page.page_id).is_none() {
            return Err(Error::UnknownPage(page.page_id.clone()));
        }
    }

    let mut gt_pages: Vec<&PageAnnotation> = gt.pages.iter().collect();
    gt_pages.sort_by(|a, b| a.page_id.cmp(&b.page_id));

    let rows: Result<Vec<PageRow>> = gt_pages
        .par_iter()
        .map(|gt_page| evaluate_page(gt_page, pred, options))
        .collect();
    let rows = rows?;

    let crr_values: Vec<(f64, u64)> = rows.iter().map(|r| (r.crr, r.gt_chars)).collect();
    let fca_values: Vec<(f64, u64)> = rows.iter().map(|r| (r.fca, r.gt_chars)).collect();
    let crr_agg = aggregate(&crr_values)?;
    let fca_agg = aggregate(&fca_values)?;

    let timed: Vec<f64> = rows.iter().filter_map(|r| r.seconds).collect();
    let mean_seconds = if timed.is_empty() {
        None
    } else {
        Some(timed.iter().sum::<f64>() / timed.len() as f64)
    };
    let engine_failures = rows.iter().filter(|r| r.engine_failed).count();

    let (strategy_label, tau) = match options.strategy {
        OrderingStrategy::ReferenceGuided { tau } => (options.strategy.label(), Some(tau)),
        _ => (options.strategy.label(), None),
    };
    let config = ReportConfig::new(
        options.policy,
        &strategy_label,
        tau,
        &options.fca_params,
        options.excluded_stages.to_vec(),
    );

    Ok(EvalReport {
        config,
        engines: vec![EngineSection {
            engine: options.engine_name.clone(),
            stage_label: options.stage_label.clone(),
            pages: rows,
            corpus: CorpusRow {
                weighted_crr: crr_agg.weighted,
                unweighted_crr: crr_agg.unweighted,
                weighted_fca: fca_agg.weighted,
                unweighted_fca: fca_agg.unweighted,
                mean_seconds,
                pages: gt_pages.len(),
                engine_failures,
            },
        }],
    })
}

fn evaluate_page(
    gt_page: &PageAnnotation,
    pred: &Corpus,
    options: &EvalOptions,
) -> Result<PageRow> {
    let empty = PageAnnotation::empty(&gt_page.page_id);
    let pred_page = pred.page(&gt_page.page_id).unwrap_or(&empty);

    let ordered = match options.strategy {
        OrderingStrategy::AsIs => pred_page.clone(),
        OrderingStrategy::BlindCentroid {
            row_overlap_threshold,
        } => order_blind(pred_page, row_overlap_threshold)?,
        OrderingStrategy::ReferenceGuided { tau } => {
            let ref_corpus = options.reference;
            let ref_page = match ref_corpus {
                Some(corpus) => corpus.page(&gt_page.page_id),
                None => Some(gt_page),
            };
            match ref_page {
                Some(reference) => {
                    // Distances inside the reorder are computed on
                    // normalized text so tau is comparable across engines.
                    let norm_ref = normalized_copy(reference, options.policy);
                    let norm_pred = normalized_copy(pred_page, options.policy);
                    order_by_reference(&norm_ref, &norm_pred, tau).0
                }
                // No reference page for this id: leave the order as is.
                None => pred_page.clone(),
            }
        }
    };

    let crr_value = page_crr(gt_page, &ordered, options.policy);
    let (fca_value, _) = fca(gt_page, &ordered, options.policy, &options.fca_params);

    let seconds = options
        .timings
        .iter()
        .find(|t| t.page_id == gt_page.page_id)
        .map(|t| {
            let mut record = t.clone();
            record
                .excluded_stages
                .extend(options.excluded_stages.iter().cloned());
            record.reported_seconds()
        });

    Ok(PageRow {
        page_id: gt_page.page_id.clone(),
        crr: crr_value.value,
        fca: fca_value.value,
        gt_chars: page_text(gt_page, options.policy).chars().count() as u64,
        seconds,
        engine_failed: options
            .failed_pages
            .iter()
            .any(|id| id == &gt_page.page_id),
    })
}

fn normalized_copy(page: &PageAnnotation, policy: &NormalizationPolicy) -> PageAnnotation {
    let mut copy = page.clone();
    for line in &mut copy.lines {
        line.text = normalize_text(&line.text, policy);
    }
    copy
}

/// Engine configuration file: a list of adapters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub engines: Vec<EngineAdapter>,
}

impl EngineConfig {
    /// Parse a TOML or JSON engine config, picked by content.
    pub fn parse(path: &Path, raw: &str) -> Result<EngineConfig> {
        let config: EngineConfig = if raw.trim_start().starts_with('{') {
            serde_json::from_str(raw).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?
        } else {
            toml::from_str(raw).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?
        };
        for adapter in &config.engines {
            adapter.validate()?;
        }
        Ok(config)
    }
}

/// Build synthetic prediction lines from ground truth, for tests and
/// closed-loop checks: same texts, freshly numbered ids, no geometry.
pub fn prediction_from_texts(page_id: &str, texts: &[String]) -> PageAnnotation {
    PageAnnotation {
        page_id: page_id.to_string(),
        image_ref: None,
        width: None,
        height: None,
        lines: texts
            .iter()
            .enumerate()
            .map(|(i, t)| TextLine::text_only(i.to_string(), i as u32, t.clone()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TextLine;

    fn adapter(template: &str) -> EngineAdapter {
        EngineAdapter {
            name: "fake".into(),
            command_template: template.into(),
            timeout_secs: 10,
            stage_label: StageLabel::DetectionRecognition,
        }
    }

    fn gt_corpus(pages: &[(&str, &[&str])]) -> Corpus {
        Corpus::new(
            "gt",
            pages
                .iter()
                .map(|(id, texts)| PageAnnotation {
                    page_id: id.to_string(),
                    image_ref: None,
                    width: None,
                    height: None,
                    lines: texts
                        .iter()
                        .enumerate()
                        .map(|(i, t)| TextLine::text_only(i.to_string(), i as u32, *t))
                        .collect(),
                })
                .collect(),
        )
    }

    #[test]
    fn template_validation() {
        assert!(adapter("ocr {input_image} -o {output_file}").validate().is_ok());
        assert!(adapter("ocr {input_image}").validate().is_err());
        assert!(adapter("ocr {input_image} {output_file} {output_file}")
            .validate()
            .is_err());
        assert!(adapter("").validate().is_err());
    }

    #[test]
    fn argv_substitution_inside_tokens() {
        let a = adapter("engine --in={input_image} --out={output_file} -q");
        let argv = a.build_argv(Path::new("/img/p.png"), Path::new("/tmp/p.out"));
        assert_eq!(
            argv,
            vec!["engine", "--in=/img/p.png", "--out=/tmp/p.out", "-q"]
        );
    }

    #[test]
    fn timing_exclusion() {
        let record = TimingRecord {
            page_id: "p".into(),
            stages: vec![("detection".into(), 1.5), ("recognition".into(), 0.5)],
            excluded_stages: vec!["detection".into()],
        };
        assert_eq!(record.reported_seconds(), 0.5);
    }

    #[test]
    fn evaluate_identical_corpora_scores_one() {
        let gt = gt_corpus(&[("a", &["hello there", "second line"])]);
        let policy = NormalizationPolicy::default();
        let report = evaluate(&gt, &gt.clone(), &EvalOptions::new(&policy, "echo")).unwrap();
        let corpus = &report.engines[0].corpus;
        assert_eq!(corpus.weighted_crr, 1.0);
        assert_eq!(corpus.weighted_fca, 1.0);
        assert_eq!(corpus.engine_failures, 0);
    }

    #[test]
    fn missing_prediction_page_scores_as_empty() {
        let gt = gt_corpus(&[("a", &["aaaa bbbb"]), ("b", &["cccc dddd"])]);
        let pred = gt_corpus(&[("a", &["aaaa bbbb"])]);
        let policy = NormalizationPolicy::default();
        let report = evaluate(&gt, &pred, &EvalOptions::new(&policy, "partial")).unwrap();
        let rows = &report.engines[0].pages;
        assert_eq!(rows.len(), 2);
        let b = rows.iter().find(|r| r.page_id == "b").unwrap();
        assert_eq!(b.crr, 0.0);
        assert_eq!(b.fca, 0.0);
        let corpus = &report.engines[0].corpus;
        assert!((corpus.weighted_crr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_prediction_page_is_an_error() {
        let gt = gt_corpus(&[("a", &["x"])]);
        let pred = gt_corpus(&[("zz", &["x"])]);
        let policy = NormalizationPolicy::default();
        assert!(matches!(
            evaluate(&gt, &pred, &EvalOptions::new(&policy, "e")),
            Err(Error::UnknownPage(_))
        ));
    }

    #[test]
    fn reference_guided_uses_gt_by_default() {
        let gt = gt_corpus(&[("a", &["first line of text", "second line of text"])]);
        let mut pred = gt.clone();
        pred.pages[0].lines[0].order_index = 1;
        pred.pages[0].lines[1].order_index = 0;
        let policy = NormalizationPolicy::default();

        let mut options = EvalOptions::new(&policy, "shuffled");
        let as_is = evaluate(&gt, &pred, &options).unwrap();
        assert!(as_is.engines[0].corpus.weighted_crr < 1.0);
        assert_eq!(as_is.engines[0].corpus.weighted_fca, 1.0);

        options.strategy = OrderingStrategy::reference_guided();
        let reordered = evaluate(&gt, &pred, &options).unwrap();
        assert_eq!(reordered.engines[0].corpus.weighted_crr, 1.0);
        assert_eq!(reordered.engines[0].corpus.weighted_fca, 1.0);
    }

    #[test]
    fn engine_config_parses_toml_and_json() {
        let toml_raw = r#"
[[engines]]
name = "tess"
command_template = "tesseract {input_image} {output_file}"
timeout_secs = 30
stage_label = "detection+recognition"
"#;
        let config = EngineConfig::parse(Path::new("e.toml"), toml_raw).unwrap();
        assert_eq!(config.engines.len(), 1);
        assert_eq!(
            config.engines[0].stage_label,
            StageLabel::DetectionRecognition
        );

        let json_raw = serde_json::to_string(&config).unwrap();
        let back = EngineConfig::parse(Path::new("e.json"), &json_raw).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn engine_config_rejects_bad_templates() {
        let toml_raw = r#"
[[engines]]
name = "broken"
command_template = "ocr {input_image}"
timeout_secs = 30
stage_label = "recognition_only"
"#;
        assert!(matches!(
            EngineConfig::parse(Path::new("e.toml"), toml_raw),
            Err(Error::AdapterConfig { .. })
        ));
    }

    #[test]
    fn run_engine_closed_loop_with_cp() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("images");
        std::fs::create_dir_all(&images).unwrap();
        std::fs::write(images.join("a.txt"), "hello world\nsecond line\n").unwrap();

        let mut gt = gt_corpus(&[("a", &["hello world", "second line"])]);
        gt.pages[0].image_ref = Some("a.txt".into());

        let run = run_engine(
            &adapter("cp {input_image} {output_file}"),
            &gt,
            &images,
            &dir.path().join("work"),
            2,
        )
        .unwrap();
        assert!(run.failures.is_empty());
        assert_eq!(run.predictions.pages.len(), 1);
        assert_eq!(run.predictions.pages[0].lines.len(), 2);
        assert_eq!(run.timings.len(), 1);

        let policy = NormalizationPolicy::default();
        let report = evaluate(
            &gt,
            &run.predictions,
            &EvalOptions::new(&policy, "cp"),
        )
        .unwrap();
        assert_eq!(report.engines[0].corpus.weighted_crr, 1.0);
    }

    #[test]
    fn run_engine_isolates_failures() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("images");
        std::fs::create_dir_all(&images).unwrap();
        std::fs::write(images.join("good.txt"), "fine\n").unwrap();
        // "bad" page points at a missing file, so cp fails for it.
        let mut gt = gt_corpus(&[("good", &["fine"]), ("bad", &["missing"])]);
        gt.pages[0].image_ref = Some("good.txt".into());
        gt.pages[1].image_ref = Some("nonexistent.txt".into());

        let run = run_engine(
            &adapter("cp {input_image} {output_file}"),
            &gt,
            &images,
            &dir.path().join("work"),
            1,
        )
        .unwrap();
        assert_eq!(run.failures.len(), 1);
        assert_eq!(run.failures[0].page_id, "bad");
        let bad_pred = run.predictions.page("bad").unwrap();
        assert!(bad_pred.lines.is_empty());
        let good_pred = run.predictions.page("good").unwrap();
        assert_eq!(good_pred.lines.len(), 1);
    }

    #[test]
    fn engine_timeout_is_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("images");
        std::fs::create_dir_all(&images).unwrap();
        std::fs::write(images.join("fast.txt"), "quick\n").unwrap();
        std::fs::write(images.join("slow.txt"), "never read\n").unwrap();

        // Shell wrapper: sleeps forever for the `slow` page, copies otherwise.
        let script = dir.path().join("engine.sh");
        std::fs::write(
            &script,
            "#!/bin/sh\ncase \"$1\" in *slow*) sleep 30;; *) cp \"$1\" \"$2\";; esac\n",
        )
        .unwrap();
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        }

        let mut gt = gt_corpus(&[("fast", &["quick"]), ("slow", &["never read"])]);
        gt.pages[0].image_ref = Some("fast.txt".into());
        gt.pages[1].image_ref = Some("slow.txt".into());

        let mut engine = adapter(&format!(
            "{} {{input_image}} {{output_file}}",
            script.display()
        ));
        engine.timeout_secs = 1;
        let run = run_engine(&engine, &gt, &images, &dir.path().join("work"), 2).unwrap();
        assert_eq!(run.failures.len(), 1);
        assert_eq!(run.failures[0].page_id, "slow");
        assert!(run.failures[0].reason.contains("timed out"));
        assert!(run.predictions.page("slow").unwrap().lines.is_empty());
        assert_eq!(run.predictions.page("fast").unwrap().lines.len(), 1);
    }

    #[test]
    fn page_without_image_ref_is_flagged() {
        let gt = gt_corpus(&[("a", &["text"])]);
        let dir = tempfile::tempdir().unwrap();
        let run = run_engine(
            &adapter("cp {input_image} {output_file}"),
            &gt,
            dir.path(),
            &dir.path().join("work"),
            1,
        )
        .unwrap();
        assert_eq!(run.failures.len(), 1);
        assert!(run.failures[0].reason.contains("image_ref"));
    }
}
