//! `lineval validate`: report every annotation invariant breach in a
//! corpus directory.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;

use lineval_core::ingest::load_page;
use lineval_core::model::{validate_page, PageKind};

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Corpus directory
    #[arg(long)]
    pub dir: PathBuf,

    /// Validate as ground truth (`gt`) or predictions (`pred`)
    #[arg(long, default_value = "gt")]
    pub kind: String,
}

pub fn run(args: ValidateArgs) -> Result<i32> {
    let kind = match args.kind.as_str() {
        "gt" => PageKind::GroundTruth,
        "pred" => PageKind::Prediction,
        other => bail!("unknown kind `{other}` (expected gt or pred)"),
    };
    if !args.dir.is_dir() {
        bail!("{} is not a directory", args.dir.display());
    }

    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            let ext = p
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or_default()
                .to_ascii_lowercase();
            p.is_file() && (ext == "json" || (ext == "txt" && kind == PageKind::Prediction))
        })
        .collect();
    paths.sort();

    let mut problems = 0usize;
    let mut pages = 0usize;
    for path in &paths {
        match load_page(path, kind) {
            Ok(page) => {
                pages += 1;
                for violation in validate_page(&page, kind) {
                    problems += 1;
                    println!("{}: {violation}", path.display());
                }
            }
            Err(e) => {
                problems += 1;
                println!("{e}");
            }
        }
    }

    if problems == 0 {
        println!("OK: {pages} pages, no violations");
        Ok(0)
    } else {
        println!("{problems} problems across {} files", paths.len());
        Ok(2)
    }
}
