//! `lineval run`: drive engines over an image directory, persisting
//! predictions and timings for later `eval --pred --timings` calls.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use lineval_core::harness::{run_engine, EngineConfig};
use lineval_core::ingest::save_corpus;
use lineval_core::model::{Corpus, PageAnnotation};

use crate::commands::eval::default_jobs;

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Engine config (TOML or JSON)
    #[arg(long)]
    pub engines: PathBuf,

    /// Directory of page images; file stems become page ids
    #[arg(long)]
    pub images: PathBuf,

    /// Output root; predictions land in <out>/<engine>/predictions/
    #[arg(long)]
    pub out: PathBuf,

    /// Concurrent engine invocations (default: logical CPUs)
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn run(args: RunArgs) -> Result<i32> {
    let raw = std::fs::read_to_string(&args.engines)
        .with_context(|| format!("reading engine config {}", args.engines.display()))?;
    let config = EngineConfig::parse(&args.engines, &raw)?;
    if config.engines.is_empty() {
        bail!("engine config lists no engines");
    }

    let pages = image_corpus(&args.images)?;
    if pages.pages.is_empty() {
        bail!("no image files found under {}", args.images.display());
    }
    let jobs = args.jobs.unwrap_or_else(default_jobs);

    let mut total_failures = 0usize;
    for adapter in &config.engines {
        let engine_dir = args.out.join(&adapter.name);
        let engine_run = run_engine(
            adapter,
            &pages,
            &args.images,
            &engine_dir.join("work"),
            jobs,
        )?;
        save_corpus(&engine_run.predictions, &engine_dir.join("predictions"))?;
        std::fs::write(
            engine_dir.join("timings.json"),
            serde_json::to_string_pretty(&engine_run.timings)?,
        )?;
        std::fs::write(
            engine_dir.join("failures.json"),
            serde_json::to_string_pretty(&engine_run.failures)?,
        )?;
        let _ = std::fs::remove_dir_all(engine_dir.join("work"));

        total_failures += engine_run.failures.len();
        let mean = if engine_run.timings.is_empty() {
            0.0
        } else {
            engine_run
                .timings
                .iter()
                .map(|t| t.reported_seconds())
                .sum::<f64>()
                / engine_run.timings.len() as f64
        };
        println!(
            "{}: {} pages, {} failures, {:.3}s/page -> {}",
            adapter.name,
            pages.pages.len(),
            engine_run.failures.len(),
            mean,
            engine_dir.display()
        );
        for failure in &engine_run.failures {
            eprintln!(
                "warning: engine `{}` failed on page `{}`: {}",
                adapter.name, failure.page_id, failure.reason
            );
        }
    }

    Ok(if total_failures > 0 { 3 } else { 0 })
}

/// Pages synthesized from an image directory: one per file, stem as id.
fn image_corpus(dir: &PathBuf) -> Result<Corpus> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let pages = paths
        .into_iter()
        .map(|path| {
            let mut page = PageAnnotation::empty(
                path.file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default(),
            );
            page.image_ref = Some(path.to_string_lossy().into_owned());
            page
        })
        .collect();
    Ok(Corpus::new("images", pages))
}
