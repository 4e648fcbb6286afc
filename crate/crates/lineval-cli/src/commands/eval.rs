//! `lineval eval`: score a prediction directory, or run engines first and
//! score their output, against a ground-truth directory.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use lineval_core::fca::FcaParams;
use lineval_core::harness::{evaluate, run_engine, EngineConfig, EvalOptions, TimingRecord};
use lineval_core::ingest::load_corpus;
use lineval_core::model::PageKind;
use lineval_core::order::DEFAULT_TAU;
use lineval_core::report::{render_report, EvalReport, ReportFormat};

use crate::options::{parse_strategy, PolicyArgs};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Ground-truth corpus directory
    #[arg(long)]
    pub gt: PathBuf,

    /// Prediction corpus directory (mutually exclusive with --engines)
    #[arg(long)]
    pub pred: Option<PathBuf>,

    /// Engine config (TOML or JSON); engines run before scoring
    #[arg(long)]
    pub engines: Option<PathBuf>,

    /// Root for relative image_ref paths (default: the --gt directory)
    #[arg(long)]
    pub images: Option<PathBuf>,

    /// Line ordering applied to predictions: as_is, blind, or ref
    #[arg(long, default_value = "as_is")]
    pub order: String,

    /// Similarity threshold for --order ref
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,

    /// Reference corpus for --order ref (default: the ground truth)
    #[arg(long)]
    pub ref_dir: Option<PathBuf>,

    #[command(flatten)]
    pub policy: PolicyArgs,

    /// Minimum remainder length FCA re-pools after a split
    #[arg(long, default_value_t = 2)]
    pub fca_min_split: usize,

    /// FCA stops matching above this normalized penalty
    #[arg(long, default_value_t = 0.75)]
    pub fca_max_penalty: f64,

    /// Stage names excluded from reported per-page times (repeatable)
    #[arg(long = "exclude-stage")]
    pub exclude_stages: Vec<String>,

    /// Timing records (JSON) to attach when scoring a prediction directory
    #[arg(long)]
    pub timings: Option<PathBuf>,

    /// Report format: csv, markdown, or json
    #[arg(long, default_value = "markdown")]
    pub format: String,

    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Concurrent engine invocations (default: logical CPUs)
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn run(args: EvalArgs) -> Result<i32> {
    match (&args.pred, &args.engines) {
        (Some(_), Some(_)) => bail!("--pred and --engines are mutually exclusive"),
        (None, None) => bail!("one of --pred or --engines is required"),
        _ => {}
    }
    let policy = args.policy.build()?;
    let strategy = parse_strategy(&args.order, args.tau)?;
    let fca_params = FcaParams::new(args.fca_min_split, args.fca_max_penalty)?;
    let format: ReportFormat = args.format.parse().map_err(|e: String| anyhow::anyhow!(e))?;

    let gt = load_corpus(&args.gt, PageKind::GroundTruth)?;
    let reference = args
        .ref_dir
        .as_ref()
        .map(|dir| load_corpus(dir, PageKind::Prediction))
        .transpose()?;

    let base_options = |engine_name: String| EvalOptions {
        policy: &policy,
        strategy,
        fca_params,
        reference: reference.as_ref(),
        timings: &[],
        excluded_stages: &args.exclude_stages,
        failed_pages: &[],
        engine_name,
        stage_label: None,
    };

    let mut sections = Vec::new();
    let mut config = None;
    let mut total_failures = 0usize;

    match (&args.pred, &args.engines) {
        (Some(_), Some(_)) | (None, None) => unreachable!("checked above"),
        (Some(pred_dir), None) => {
            let pred = load_corpus(pred_dir, PageKind::Prediction)?;
            let timings: Vec<TimingRecord> = match &args.timings {
                Some(path) => {
                    let raw = std::fs::read_to_string(path)
                        .with_context(|| format!("reading timings {}", path.display()))?;
                    serde_json::from_str(&raw)
                        .with_context(|| format!("parsing timings {}", path.display()))?
                }
                None => Vec::new(),
            };
            let mut options = base_options(pred.name.clone());
            options.timings = &timings;
            let report = evaluate(&gt, &pred, &options)?;
            config = Some(report.config);
            sections.extend(report.engines);
        }
        (None, Some(engines_path)) => {
            let raw = std::fs::read_to_string(engines_path)
                .with_context(|| format!("reading engine config {}", engines_path.display()))?;
            let engine_config = EngineConfig::parse(engines_path, &raw)?;
            if engine_config.engines.is_empty() {
                bail!("engine config lists no engines");
            }
            let image_root = args.images.clone().unwrap_or_else(|| args.gt.clone());
            let jobs = args.jobs.unwrap_or_else(default_jobs);
            let work_root = std::env::temp_dir().join(format!(
                "lineval-eval-{}-{}",
                std::process::id(),
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or_default()
            ));

            for adapter in &engine_config.engines {
                let engine_run = run_engine(
                    adapter,
                    &gt,
                    &image_root,
                    &work_root.join(&adapter.name),
                    jobs,
                )?;
                total_failures += engine_run.failures.len();
                for failure in &engine_run.failures {
                    eprintln!(
                        "warning: engine `{}` failed on page `{}`: {}",
                        adapter.name, failure.page_id, failure.reason
                    );
                }
                let failed_pages: Vec<String> = engine_run
                    .failures
                    .iter()
                    .map(|f| f.page_id.clone())
                    .collect();
                let mut options = base_options(adapter.name.clone());
                options.timings = &engine_run.timings;
                options.failed_pages = &failed_pages;
                options.stage_label = Some(adapter.stage_label.as_str().to_string());
                let report = evaluate(&gt, &engine_run.predictions, &options)?;
                config.get_or_insert(report.config);
                sections.extend(report.engines);
            }
            let _ = std::fs::remove_dir_all(&work_root);
        }
    }

    let report = EvalReport {
        config: config.expect("at least one evaluation ran"),
        engines: sections,
    };
    let rendered = render_report(&report, format);
    match &args.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => print!("{rendered}"),
    }

    Ok(if total_failures > 0 { 3 } else { 0 })
}

pub(crate) fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
