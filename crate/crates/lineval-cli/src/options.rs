//! Shared flag handling: normalization policy, ordering strategy, and
//! small value parsers.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use lineval_core::normalize::{builtin_charset, Charset, NormalizationPolicy, UnicodeForm};
use lineval_core::order::{OrderingStrategy, DEFAULT_ROW_OVERLAP_THRESHOLD};

#[derive(Args, Debug, Clone)]
pub struct PolicyArgs {
    /// Charset: `english95`, `english95_space`, `none`, or a path to a
    /// UTF-8 file whose characters (newlines excluded) form the set
    #[arg(long, default_value = "none")]
    pub charset: String,

    /// Keep original letter case instead of case-folding
    #[arg(long)]
    pub no_case_fold: bool,

    /// Keep whitespace exactly as written instead of collapsing runs
    #[arg(long)]
    pub no_collapse_whitespace: bool,

    /// Unicode normalization applied first: `nfc` or `none`
    #[arg(long, default_value = "nfc")]
    pub unicode_form: String,
}

impl PolicyArgs {
    pub fn build(&self) -> Result<NormalizationPolicy> {
        let charset = self.load_charset()?;
        let unicode_form = match self.unicode_form.as_str() {
            "nfc" => UnicodeForm::Nfc,
            "none" => UnicodeForm::None,
            other => bail!("unknown unicode form `{other}` (expected `nfc` or `none`)"),
        };
        Ok(NormalizationPolicy {
            case_fold: !self.no_case_fold,
            unicode_form,
            charset,
            collapse_whitespace: !self.no_collapse_whitespace,
        })
    }

    fn load_charset(&self) -> Result<Option<Charset>> {
        match self.charset.as_str() {
            "none" => Ok(None),
            "english95" | "english95_space" => Ok(Some(builtin_charset(&self.charset)?)),
            path => {
                let file = PathBuf::from(path);
                if !file.is_file() {
                    bail!(
                        "charset `{path}` is neither a builtin name nor a readable file \
                         (builtins: english95, english95_space, none)"
                    );
                }
                let raw = std::fs::read_to_string(&file)
                    .with_context(|| format!("reading charset file {path}"))?;
                let name = file
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("custom")
                    .to_string();
                Ok(Some(Charset::from_chars(
                    name,
                    raw.chars().filter(|&c| c != '\n' && c != '\r'),
                )))
            }
        }
    }
}

pub fn parse_strategy(order: &str, tau: f64) -> Result<OrderingStrategy> {
    match order {
        "as_is" => Ok(OrderingStrategy::AsIs),
        "blind" => Ok(OrderingStrategy::BlindCentroid {
            row_overlap_threshold: DEFAULT_ROW_OVERLAP_THRESHOLD,
        }),
        "ref" => {
            if !(0.0..=1.0).contains(&tau) {
                bail!("--tau must be in [0, 1], got {tau}");
            }
            Ok(OrderingStrategy::ReferenceGuided { tau })
        }
        other => bail!("unknown ordering `{other}` (expected as_is, blind, or ref)"),
    }
}

/// Parse `LO:HI` range flags for synth parameters.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .with_context(|| format!("range `{s}` must look like LO:HI"))?;
    let lo: f64 = lo.trim().parse().context("range low bound")?;
    let hi: f64 = hi.trim().parse().context("range high bound")?;
    if lo > hi {
        bail!("range `{s}` has low > high");
    }
    Ok((lo, hi))
}
