//! `lineval stats`: character frequency and words-per-line histograms
//! over a corpus, as CSV or a terminal bar chart.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use lineval_core::ingest::load_corpus;
use lineval_core::model::PageKind;
use lineval_core::report::csv_escape;
use lineval_core::stats::{char_frequency, words_per_line, Histogram};

use crate::options::PolicyArgs;

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Corpus directory
    #[arg(long)]
    pub dir: PathBuf,

    /// Validate the corpus as ground truth (`gt`) or predictions (`pred`)
    #[arg(long, default_value = "gt")]
    pub kind: String,

    /// Which histogram: chars, words, or both
    #[arg(long, default_value = "both")]
    pub metric: String,

    #[command(flatten)]
    pub policy: PolicyArgs,

    /// Write CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Render terminal bar charts instead of CSV
    #[arg(long)]
    pub chart: bool,
}

pub fn run(args: StatsArgs) -> Result<i32> {
    let kind = match args.kind.as_str() {
        "gt" => PageKind::GroundTruth,
        "pred" => PageKind::Prediction,
        other => bail!("unknown kind `{other}` (expected gt or pred)"),
    };
    let policy = args.policy.build()?;
    let corpus = load_corpus(&args.dir, kind)?;

    let mut histograms: Vec<(&str, Histogram)> = Vec::new();
    match args.metric.as_str() {
        "chars" => histograms.push(("char", char_frequency(&corpus, &policy))),
        "words" => histograms.push(("words_per_line", words_per_line(&corpus, &policy))),
        "both" => {
            histograms.push(("char", char_frequency(&corpus, &policy)));
            histograms.push(("words_per_line", words_per_line(&corpus, &policy)));
        }
        other => bail!("unknown metric `{other}` (expected chars, words, or both)"),
    }

    let rendered = if args.chart {
        histograms
            .iter()
            .map(|(name, h)| bar_chart(name, h))
            .collect::<Vec<_>>()
            .join("\n")
    } else if histograms.len() == 1 {
        // Single-metric output is plain `label,count` rows.
        let mut out = String::from("label,count\n");
        for (label, count) in &histograms[0].1.bins {
            let _ = writeln!(out, "{},{count}", csv_escape(label));
        }
        out
    } else {
        let mut out = String::from("metric,label,count\n");
        for (name, histogram) in &histograms {
            for (label, count) in &histogram.bins {
                let _ = writeln!(out, "{name},{},{count}", csv_escape(label));
            }
        }
        out
    };

    match &args.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing stats to {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(0)
}

fn bar_chart(name: &str, histogram: &Histogram) -> String {
    const WIDTH: usize = 50;
    let max = histogram.bins.iter().map(|&(_, n)| n).max().unwrap_or(1);
    let mut out = format!("{name} (total {})\n", histogram.total);
    for (label, count) in histogram.bins.iter().take(40) {
        let bar = "#".repeat(((count * WIDTH as u64) / max.max(1)) as usize);
        let shown = if label == " " { "␣".to_string() } else { label.clone() };
        let _ = writeln!(out, "{shown:>6} {count:>8} {bar}");
    }
    if histogram.bins.len() > 40 {
        let _ = writeln!(out, "  ... {} more bins", histogram.bins.len() - 40);
    }
    out
}
