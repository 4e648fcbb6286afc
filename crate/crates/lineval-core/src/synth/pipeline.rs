//! The rendering pipeline: typeset, background, geometry, blur, noise,
//! margins, resize. The stage order is fixed so that a `SynthSpec` fully
//! determines the output image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::synth::glyphs::GlyphSource;
use crate::synth::raster::{
    affine_skew_shear, fit_width, gaussian_blur, max_filter, min_filter, pad_margins,
    resize_bilinear, GrayImage,
};
use crate::synth::{Background, Noise, SynthSpec, MAX_TYPESET_WIDTH_PX};

// Separate ChaCha streams per random consumer keep draws independent of
// one another, so adding noise draws never shifts background phases.
const STREAM_NOISE: u64 = 0;
const STREAM_BACKGROUND: u64 = 1;

/// Render one synthetic line image. Pure function of (spec, glyphs):
/// repeated calls return bit-identical images.
pub fn render_line(spec: &SynthSpec, glyphs: &GlyphSource) -> Result<GrayImage> {
    spec.distortion.validate()?;
    if spec.text.is_empty() {
        return Err(Error::EmptySpecText);
    }

    // (1) Typeset left to right.
    let coverage = typeset(&spec.text, glyphs, spec.distortion.extra_char_spacing_px)?;

    // (2) Composite onto the background.
    let base = base_tone(&spec.distortion.background);
    let mut bg_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    bg_rng.set_stream(STREAM_BACKGROUND);
    let background = make_background(
        &spec.distortion.background,
        coverage.width,
        coverage.height,
        &mut bg_rng,
        &coverage,
    );
    let mut img = background;
    for (out, &cov) in img.pixels.iter_mut().zip(coverage.pixels.iter()) {
        let ink = 1.0 - cov as f64 / 255.0;
        *out = (*out as f64 * ink).round() as u8;
    }

    // (3) Skew then shear about the center; canvas expands so nothing clips.
    img = affine_skew_shear(&img, spec.distortion.skew_deg, spec.distortion.shear_deg, base);

    // (4) Blur.
    img = gaussian_blur(&img, spec.distortion.blur_sigma);

    // (5) Noise / morphology.
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(STREAM_NOISE);
    img = apply_noise(&img, &spec.distortion.noise, &mut noise_rng);

    // (6) Margins.
    img = pad_margins(&img, spec.distortion.margin_px, base);

    // (7) Height 32 preserving aspect, then right-pad or center-crop to 400.
    let scale = spec.target_height as f64 / img.height as f64;
    let new_w = ((img.width as f64 * scale).round() as u32).max(1);
    img = resize_bilinear(&img, new_w, spec.target_height);
    Ok(fit_width(&img, spec.target_width, base))
}

/// Ink coverage canvas for the text, bottom-aligned in the line box.
fn typeset(text: &str, glyphs: &GlyphSource, extra_spacing: u32) -> Result<GrayImage> {
    let line_height = glyphs.line_height();
    let mut pen = 0u64;
    let mut placements = Vec::new();
    for c in text.chars() {
        let glyph = glyphs.glyph(c).ok_or(Error::MissingGlyph(c))?;
        placements.push((pen as u32, glyph));
        pen += (glyph.advance + extra_spacing) as u64;
        if pen > MAX_TYPESET_WIDTH_PX as u64 {
            return Err(Error::TextTooLong {
                width: pen as u32,
                cap: MAX_TYPESET_WIDTH_PX,
            });
        }
    }
    let width = placements
        .iter()
        .map(|(x, g)| x + g.width)
        .max()
        .unwrap_or(1)
        .max(pen as u32)
        .max(1);

    let mut canvas = GrayImage::new(width, line_height, 0);
    for (x0, glyph) in placements {
        let y0 = line_height.saturating_sub(glyph.height);
        for gy in 0..glyph.height.min(line_height) {
            for gx in 0..glyph.width {
                let v = glyph.coverage[(gy * glyph.width + gx) as usize];
                if v > 0 {
                    let (x, y) = (x0 + gx, y0 + gy);
                    if x < canvas.width && y < canvas.height {
                        let cur = canvas.get(x, y);
                        canvas.set(x, y, cur.max(v));
                    }
                }
            }
        }
    }
    Ok(canvas)
}

/// The flat tone used for affine borders, margins, and width padding.
pub(crate) fn base_tone(background: &Background) -> u8 {
    match background {
        Background::White => 255,
        Background::SolidColor { gray } => *gray,
        Background::RuledLines => 255,
        Background::Quasicrystal => 255,
        Background::ReversedBlurredText => 255,
    }
}

fn make_background(
    kind: &Background,
    width: u32,
    height: u32,
    rng: &mut ChaCha8Rng,
    coverage: &GrayImage,
) -> GrayImage {
    match kind {
        Background::White => GrayImage::new(width, height, 255),
        Background::SolidColor { gray } => GrayImage::new(width, height, *gray),
        Background::RuledLines => {
            let period = rng.random_range(14u32..=28);
            let offset = rng.random_range(0..period);
            let thickness = rng.random_range(1u32..=2);
            let mut img = GrayImage::new(width, height, 255);
            for y in 0..height {
                if (y + offset) % period < thickness {
                    for x in 0..width {
                        img.set(x, y, 130);
                    }
                }
            }
            img
        }
        Background::Quasicrystal => {
            // Standing-wave sum of 7 plane waves with seeded phases, mapped
            // into a light band so the ink stays readable.
            const WAVES: usize = 7;
            let wavelength: f64 = rng.random_range(8.0..=20.0);
            let k = std::f64::consts::TAU / wavelength;
            let phases: Vec<f64> = (0..WAVES)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            let mut img = GrayImage::new(width, height, 255);
            for y in 0..height {
                for x in 0..width {
                    let mut v = 0.0;
                    for (i, phase) in phases.iter().enumerate() {
                        let angle = i as f64 * std::f64::consts::PI / WAVES as f64;
                        let proj = x as f64 * angle.cos() + y as f64 * angle.sin();
                        v += (k * proj + phase).cos();
                    }
                    let t = (v / WAVES as f64 + 1.0) / 2.0;
                    img.set(x, y, 255 - (70.0 * t).round() as u8);
                }
            }
            img
        }
        Background::ReversedBlurredText => {
            // Ink bleed-through from the reverse side of the page: the line
            // itself, mirrored, blurred, and lightened.
            let mut mirrored = GrayImage::new(width, height, 0);
            for y in 0..height.min(coverage.height) {
                for x in 0..width.min(coverage.width) {
                    mirrored.set(width - 1 - x, y, coverage.get(x, y));
                }
            }
            let bleed = gaussian_blur(&mirrored, 1.2);
            let mut img = GrayImage::new(width, height, 255);
            for (out, &b) in img.pixels.iter_mut().zip(bleed.pixels.iter()) {
                *out = 255 - (0.35 * b as f64).round() as u8;
            }
            img
        }
    }
}

fn apply_noise(img: &GrayImage, noise: &Noise, rng: &mut ChaCha8Rng) -> GrayImage {
    match noise {
        Noise::None => img.clone(),
        Noise::Gaussian { sigma } => {
            let std = sigma * 255.0;
            let mut out = img.clone();
            for p in out.pixels.iter_mut() {
                let n: f64 = rng.sample(rand_distr::StandardNormal);
                *p = (*p as f64 + n * std).round().clamp(0.0, 255.0) as u8;
            }
            out
        }
        Noise::SaltPepper { p } => {
            let mut out = img.clone();
            for px in out.pixels.iter_mut() {
                if rng.random::<f64>() < *p {
                    *px = if rng.random::<bool>() { 255 } else { 0 };
                }
            }
            out
        }
        Noise::Dilate { radius } => min_filter(img, *radius),
        Noise::Erode { radius } => max_filter(img, *radius),
    }
}
