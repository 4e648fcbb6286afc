//! `lineval synth`: sample seeded rendering specs from a line corpus and
//! emit distorted 32x400 grayscale PNGs plus a manifest.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use lineval_core::synth::{
    generate_dataset, sample_specs, BackgroundKind, DistortionRanges, GlyphSource, NoiseKind,
};

use crate::options::parse_range;

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Text file whose non-empty lines form the sampling corpus
    #[arg(long)]
    pub lines: PathBuf,

    /// Number of images to generate
    #[arg(long)]
    pub count: usize,

    /// Master seed; reruns with equal inputs are bit-identical
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory for images and manifest.tsv
    #[arg(long)]
    pub out: PathBuf,

    /// Glyph atlas directory (atlas.json + atlas.png); builtin when omitted
    #[arg(long)]
    pub atlas: Option<PathBuf>,

    /// Disable all distortions (clean white-background renders)
    #[arg(long)]
    pub identity: bool,

    /// Override the skew range, e.g. `-5:5`
    #[arg(long)]
    pub skew: Option<String>,

    /// Override the shear range, e.g. `-5:5`
    #[arg(long)]
    pub shear: Option<String>,

    /// Override the blur sigma range, e.g. `0:1.5`
    #[arg(long)]
    pub blur: Option<String>,
}

pub fn run(args: SynthArgs) -> Result<i32> {
    let raw = std::fs::read_to_string(&args.lines)
        .with_context(|| format!("reading corpus lines {}", args.lines.display()))?;
    let corpus_lines: Vec<String> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if corpus_lines.is_empty() {
        bail!("{} contains no non-empty lines", args.lines.display());
    }

    let glyphs = match &args.atlas {
        Some(dir) => GlyphSource::load_atlas(dir)?,
        None => GlyphSource::builtin(),
    };

    let mut ranges = DistortionRanges::default();
    if args.identity {
        ranges.blur_sigma = (0.0, 0.0);
        ranges.skew_deg = (0.0, 0.0);
        ranges.shear_deg = (0.0, 0.0);
        ranges.margin_px = (0, 0);
        ranges.extra_char_spacing_px = (0, 0);
        ranges.noise_kinds = vec![NoiseKind::None];
        ranges.backgrounds = vec![BackgroundKind::White];
    }
    if let Some(skew) = &args.skew {
        ranges.skew_deg = parse_range(skew)?;
    }
    if let Some(shear) = &args.shear {
        ranges.shear_deg = parse_range(shear)?;
    }
    if let Some(blur) = &args.blur {
        ranges.blur_sigma = parse_range(blur)?;
    }

    let specs = sample_specs(&corpus_lines, args.count, args.seed, &ranges, glyphs.id())?;
    let manifest = generate_dataset(&specs, &glyphs, &args.out)?;
    println!(
        "wrote {} images ({} failures) and manifest.tsv to {}",
        manifest.rows.len(),
        manifest.failures.len(),
        args.out.display()
    );
    for failure in &manifest.failures {
        eprintln!(
            "warning: spec {} failed: {}",
            &failure.spec_digest[..8],
            failure.error
        );
    }
    Ok(0)
}
