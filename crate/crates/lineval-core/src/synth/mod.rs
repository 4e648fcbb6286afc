//! Deterministic synthetic line-image generation: seeded specs drawn from
//! a text corpus, a fixed-order distortion pipeline, and dataset emission
//! with a reproducible manifest.

mod glyphs;
mod pipeline;
mod raster;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use glyphs::{Glyph, GlyphSource, FALLBACK_CHAR};
pub use pipeline::render_line;
pub use raster::GrayImage;

/// Line images are emitted at this fixed size.
pub const TARGET_HEIGHT: u32 = 32;
pub const TARGET_WIDTH: u32 = 400;

/// Typeset width cap before resizing; longer texts fail with `TextTooLong`.
pub const MAX_TYPESET_WIDTH_PX: u32 = 16_384;

/// Pixel noise applied after blurring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    None,
    /// Additive Gaussian noise; sigma is relative to full scale.
    Gaussian { sigma: f64 },
    /// Each pixel flips to black or white with probability `p`.
    SaltPepper { p: f64 },
    /// Morphological thickening of dark strokes.
    Dilate { radius: u32 },
    /// Morphological thinning of dark strokes.
    Erode { radius: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Gaussian,
    SaltPepper,
    Dilate,
    Erode,
}

/// What the text is composited onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    White,
    SolidColor { gray: u8 },
    RuledLines,
    Quasicrystal,
    /// Mirrored, blurred, lightened copy of the line itself, simulating
    /// ink bleed-through from the reverse side of the page.
    ReversedBlurredText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    White,
    SolidColor,
    RuledLines,
    Quasicrystal,
    ReversedBlurredText,
}

/// All distortion knobs for one rendered line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionParams {
    /// Gaussian blur sigma in pixels, 0 to 3.
    pub blur_sigma: f64,
    /// Rotation in degrees, -10 to +10.
    pub skew_deg: f64,
    /// Horizontal shear in degrees, -10 to +10.
    pub shear_deg: f64,
    pub noise: Noise,
    pub background: Background,
    /// Margin added on every side, 0 to 20 pixels.
    pub margin_px: u32,
    /// Extra spacing between characters, 0 to 8 pixels.
    pub extra_char_spacing_px: u32,
}

impl DistortionParams {
    /// No distortion at all: white background, zero blur/skew/shear/noise.
    pub fn identity() -> Self {
        DistortionParams {
            blur_sigma: 0.0,
            skew_deg: 0.0,
            shear_deg: 0.0,
            noise: Noise::None,
            background: Background::White,
            margin_px: 0,
            extra_char_spacing_px: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidDistortion(msg));
        if !(0.0..=3.0).contains(&self.blur_sigma) {
            return fail(format!("blur_sigma {} outside [0, 3]", self.blur_sigma));
        }
        if !(-10.0..=10.0).contains(&self.skew_deg) {
            return fail(format!("skew_deg {} outside [-10, 10]", self.skew_deg));
        }
        if !(-10.0..=10.0).contains(&self.shear_deg) {
            return fail(format!("shear_deg {} outside [-10, 10]", self.shear_deg));
        }
        match self.noise {
            Noise::Gaussian { sigma } if !(0.0..=0.1).contains(&sigma) => {
                return fail(format!("gaussian sigma {sigma} outside [0, 0.1]"));
            }
            Noise::SaltPepper { p } if !(0.0..=0.05).contains(&p) => {
                return fail(format!("salt-pepper p {p} outside [0, 0.05]"));
            }
            Noise::Dilate { radius } | Noise::Erode { radius } if !(1..=2).contains(&radius) => {
                return fail(format!("morphology radius {radius} outside {{1, 2}}"));
            }
            _ => {}
        }
        if self.margin_px > 20 {
            return fail(format!("margin_px {} outside [0, 20]", self.margin_px));
        }
        if self.extra_char_spacing_px > 8 {
            return fail(format!(
                "extra_char_spacing_px {} outside [0, 8]",
                self.extra_char_spacing_px
            ));
        }
        Ok(())
    }
}

/// A complete, seeded recipe for one synthetic line image. Rendering is a
/// pure function of this value plus the glyph source it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub text: String,
    /// Id of the glyph source to render with.
    pub glyph_source: String,
    pub distortion: DistortionParams,
    pub seed: u64,
    pub target_height: u32,
    pub target_width: u32,
}

impl SynthSpec {
    /// Stable content digest (SHA-256 of the canonical JSON form).
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serialization cannot fail");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Uniform sampling bounds for [`sample_specs`]. Defaults cover the full
/// legal parameter ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionRanges {
    pub blur_sigma: (f64, f64),
    pub skew_deg: (f64, f64),
    pub shear_deg: (f64, f64),
    pub gaussian_sigma: (f64, f64),
    pub salt_pepper_p: (f64, f64),
    pub morph_radius: (u32, u32),
    pub margin_px: (u32, u32),
    pub extra_char_spacing_px: (u32, u32),
    pub solid_gray: (u8, u8),
    pub noise_kinds: Vec<NoiseKind>,
    pub backgrounds: Vec<BackgroundKind>,
}

impl Default for DistortionRanges {
    fn default() -> Self {
        DistortionRanges {
            blur_sigma: (0.0, 3.0),
            skew_deg: (-10.0, 10.0),
            shear_deg: (-10.0, 10.0),
            gaussian_sigma: (0.0, 0.1),
            salt_pepper_p: (0.0, 0.05),
            morph_radius: (1, 2),
            margin_px: (0, 20),
            extra_char_spacing_px: (0, 8),
            solid_gray: (140, 255),
            noise_kinds: vec![
                NoiseKind::None,
                NoiseKind::Gaussian,
                NoiseKind::SaltPepper,
                NoiseKind::Dilate,
                NoiseKind::Erode,
            ],
            backgrounds: vec![
                BackgroundKind::White,
                BackgroundKind::SolidColor,
                BackgroundKind::RuledLines,
                BackgroundKind::Quasicrystal,
                BackgroundKind::ReversedBlurredText,
            ],
        }
    }
}

/// Draw `n` fully-specified rendering recipes.
///
/// Spec `i` comes from an independent counter-based RNG stream keyed by
/// `(seed, i)`, so the list is deterministic, order-independent, and any
/// prefix of it is stable under a larger `n`. Texts are drawn uniformly
/// from `corpus_lines`; parameters uniformly within `ranges`.
pub fn sample_specs(
    corpus_lines: &[String],
    n: usize,
    seed: u64,
    ranges: &DistortionRanges,
    glyph_source: &str,
) -> Result<Vec<SynthSpec>> {
    if corpus_lines.is_empty() {
        return Err(Error::EmptyCorpus("no corpus lines to sample from".into()));
    }
    if ranges.noise_kinds.is_empty() || ranges.backgrounds.is_empty() {
        return Err(Error::InvalidDistortion(
            "noise_kinds and backgrounds must be non-empty".into(),
        ));
    }
    let mut specs = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let text = corpus_lines[rng.random_range(0..corpus_lines.len())].clone();
        let noise = match ranges.noise_kinds[rng.random_range(0..ranges.noise_kinds.len())] {
            NoiseKind::None => Noise::None,
            NoiseKind::Gaussian => Noise::Gaussian {
                sigma: sample_f64(&mut rng, ranges.gaussian_sigma),
            },
            NoiseKind::SaltPepper => Noise::SaltPepper {
                p: sample_f64(&mut rng, ranges.salt_pepper_p),
            },
            NoiseKind::Dilate => Noise::Dilate {
                radius: rng.random_range(ranges.morph_radius.0..=ranges.morph_radius.1),
            },
            NoiseKind::Erode => Noise::Erode {
                radius: rng.random_range(ranges.morph_radius.0..=ranges.morph_radius.1),
            },
        };
        let background = match ranges.backgrounds[rng.random_range(0..ranges.backgrounds.len())] {
            BackgroundKind::White => Background::White,
            BackgroundKind::SolidColor => Background::SolidColor {
                gray: rng.random_range(ranges.solid_gray.0..=ranges.solid_gray.1),
            },
            BackgroundKind::RuledLines => Background::RuledLines,
            BackgroundKind::Quasicrystal => Background::Quasicrystal,
            BackgroundKind::ReversedBlurredText => Background::ReversedBlurredText,
        };
        let distortion = DistortionParams {
            blur_sigma: sample_f64(&mut rng, ranges.blur_sigma),
            skew_deg: sample_f64(&mut rng, ranges.skew_deg),
            shear_deg: sample_f64(&mut rng, ranges.shear_deg),
            noise,
            background,
            margin_px: rng.random_range(ranges.margin_px.0..=ranges.margin_px.1),
            extra_char_spacing_px: rng
                .random_range(ranges.extra_char_spacing_px.0..=ranges.extra_char_spacing_px.1),
        };
        distortion.validate()?;
        specs.push(SynthSpec {
            text,
            glyph_source: glyph_source.to_string(),
            distortion,
            seed: rng.random(),
            target_height: TARGET_HEIGHT,
            target_width: TARGET_WIDTH,
        });
    }
    Ok(specs)
}

fn sample_f64(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub image_path: String,
    pub text: String,
    pub spec_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFailure {
    pub spec_digest: String,
    pub error: String,
}

/// What a dataset generation run produced: one row per written image plus
/// a record of every spec that failed to render.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    pub failures: Vec<ManifestFailure>,
}

impl Manifest {
    /// Tab-separated form: `image_path<TAB>text<TAB>spec_digest` per row,
    /// failures as trailing `#`-prefixed comment lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}", row.image_path, row.text, row.spec_digest);
        }
        for failure in &self.failures {
            let _ = writeln!(out, "# failed\t{}\t{}", failure.spec_digest, failure.error);
        }
        out
    }
}

/// Render every spec into `out_dir` and write `manifest.tsv` alongside the
/// images. Specs that fail to render are skipped and reported in the
/// manifest; rendering is parallel but output is identical to a serial
/// run.
pub fn generate_dataset(
    specs: &[SynthSpec],
    glyphs: &GlyphSource,
    out_dir: &Path,
) -> Result<Manifest> {
    fs::create_dir_all(out_dir)?;
    let rendered: Vec<Result<GrayImage>> = specs
        .par_iter()
        .map(|spec| render_line(spec, glyphs))
        .collect();

    let mut manifest = Manifest::default();
    for (i, (spec, result)) in specs.iter().zip(rendered).enumerate() {
        let digest = spec.digest();
        match result {
            Ok(image) => {
                let file_name = format!("{i:06}_{}.png", &digest[..8]);
                image.save_png(&out_dir.join(&file_name))?;
                manifest.rows.push(ManifestRow {
                    image_path: file_name,
                    text: spec.text.clone(),
                    spec_digest: digest,
                });
            }
            Err(e) => manifest.failures.push(ManifestFailure {
                spec_digest: digest,
                error: e.to_string(),
            }),
        }
    }
    fs::write(out_dir.join("manifest.tsv"), manifest.to_tsv())?;
    Ok(manifest)
}
