//! Synthetic generator properties: bit-exact determinism, fixed output
//! geometry, measured skew angle, and salt-pepper statistics.

use std::fs;

use lineval_core::synth::{
    generate_dataset, render_line, sample_specs, Background, DistortionParams, DistortionRanges,
    GlyphSource, GrayImage, Noise, SynthSpec,
};

fn corpus_lines() -> Vec<String> {
    vec![
        "a quiet harbor under copper light".into(),
        "the lantern signal crossed the meadow".into(),
        "whisper networks carry river stones".into(),
        "five dozen boxes of black quartz".into(),
    ]
}

fn base_spec(text: &str, seed: u64) -> SynthSpec {
    SynthSpec {
        text: text.into(),
        glyph_source: "builtin".into(),
        distortion: DistortionParams::identity(),
        seed,
        target_height: 32,
        target_width: 400,
    }
}

#[test]
fn batch_regenerates_bit_identically() {
    let glyphs = GlyphSource::builtin();
    let specs = sample_specs(&corpus_lines(), 150, 0xd15c, &DistortionRanges::default(), "builtin")
        .unwrap();
    let specs_again =
        sample_specs(&corpus_lines(), 150, 0xd15c, &DistortionRanges::default(), "builtin")
            .unwrap();
    assert_eq!(specs, specs_again);

    for spec in specs.iter().step_by(7) {
        let a = render_line(spec, &glyphs).unwrap();
        let b = render_line(spec, &glyphs).unwrap();
        assert_eq!(a, b, "non-deterministic render for {}", spec.digest());
    }
}

#[test]
fn every_output_is_exactly_32_by_400() {
    let glyphs = GlyphSource::builtin();
    let specs = sample_specs(&corpus_lines(), 60, 0x5123, &DistortionRanges::default(), "builtin")
        .unwrap();
    for spec in &specs {
        let img = render_line(spec, &glyphs).unwrap();
        assert_eq!((img.width, img.height), (400, 32));
    }
}

#[test]
fn dataset_rerun_is_byte_identical() {
    let glyphs = GlyphSource::builtin();
    let specs = sample_specs(&corpus_lines(), 24, 0xe9, &DistortionRanges::default(), "builtin")
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let manifest_a = generate_dataset(&specs, &glyphs, &out_a).unwrap();
    let manifest_b = generate_dataset(&specs, &glyphs, &out_b).unwrap();
    assert_eq!(manifest_a, manifest_b);
    assert_eq!(
        fs::read(out_a.join("manifest.tsv")).unwrap(),
        fs::read(out_b.join("manifest.tsv")).unwrap()
    );
    for row in &manifest_a.rows {
        assert_eq!(
            fs::read(out_a.join(&row.image_path)).unwrap(),
            fs::read(out_b.join(&row.image_path)).unwrap(),
            "image bytes differ for {}",
            row.image_path
        );
    }
}

/// Orientation of the dominant ink axis in degrees, via a weighted
/// principal-axis fit. Raster coordinates, y down.
fn principal_axis_degrees(img: &GrayImage) -> f64 {
    let mut total = 0.0f64;
    let (mut mx, mut my) = (0.0f64, 0.0f64);
    for y in 0..img.height {
        for x in 0..img.width {
            let w = (255 - img.get(x, y)) as f64;
            total += w;
            mx += w * x as f64;
            my += w * y as f64;
        }
    }
    mx /= total;
    my /= total;
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..img.height {
        for x in 0..img.width {
            let w = (255 - img.get(x, y)) as f64;
            let dx = x as f64 - mx;
            let dy = y as f64 - my;
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
    }
    (0.5 * (2.0 * sxy).atan2(sxx - syy)).to_degrees()
}

#[test]
fn measured_skew_matches_requested_angle() {
    let glyphs = GlyphSource::builtin();
    let text = "the lantern signal crossed the meadow at dusk";
    let mut spec = base_spec(text, 7);
    spec.distortion.skew_deg = 10.0;
    let img = render_line(&spec, &glyphs).unwrap();
    let angle = principal_axis_degrees(&img);
    assert!(
        (angle - 10.0).abs() <= 0.5,
        "measured {angle:.3} degrees, wanted 10 +/- 0.5"
    );

    spec.distortion.skew_deg = -10.0;
    let img = render_line(&spec, &glyphs).unwrap();
    let angle = principal_axis_degrees(&img);
    assert!(
        (angle + 10.0).abs() <= 0.5,
        "measured {angle:.3} degrees, wanted -10 +/- 0.5"
    );

    spec.distortion.skew_deg = 0.0;
    let img = render_line(&spec, &glyphs).unwrap();
    let angle = principal_axis_degrees(&img);
    assert!(angle.abs() <= 0.5, "measured {angle:.3} degrees, wanted 0");
}

#[test]
fn salt_pepper_flip_fraction_tracks_p() {
    let glyphs = GlyphSource::builtin();
    let p = 0.03;
    // 60-character lines typeset 480px wide at a native 16px height; with
    // target 400x16 the crop keeps resampling out of the measurement.
    let text: String = "copper lantern whisper anchor meadow signal river stone harbor"
        .chars()
        .take(60)
        .collect();
    let mut flipped = 0u64;
    let mut total = 0u64;
    for seed in 0..25u64 {
        let mut clean = base_spec(&text, seed);
        clean.target_height = 16;
        clean.distortion.background = Background::SolidColor { gray: 128 };
        let mut noisy = clean.clone();
        noisy.distortion.noise = Noise::SaltPepper { p };

        let clean_img = render_line(&clean, &glyphs).unwrap();
        let noisy_img = render_line(&noisy, &glyphs).unwrap();
        assert_eq!(clean_img.width, noisy_img.width);
        flipped += clean_img
            .pixels
            .iter()
            .zip(noisy_img.pixels.iter())
            .filter(|(a, b)| a != b)
            .count() as u64;
        total += clean_img.pixels.len() as u64;
    }
    assert!(total >= 100_000, "need at least 1e5 pixels, got {total}");
    let measured = flipped as f64 / total as f64;
    assert!(
        (measured - p).abs() <= 0.2 * p,
        "flip fraction {measured:.5} outside 20% of {p}"
    );
}

#[test]
fn distortion_params_out_of_range_are_rejected() {
    let glyphs = GlyphSource::builtin();
    let mut spec = base_spec("abc", 0);
    spec.distortion.skew_deg = 11.0;
    assert!(render_line(&spec, &glyphs).is_err());
    spec.distortion.skew_deg = 0.0;
    spec.distortion.blur_sigma = 4.0;
    assert!(render_line(&spec, &glyphs).is_err());
    spec.distortion.blur_sigma = 0.0;
    spec.distortion.noise = Noise::SaltPepper { p: 0.2 };
    assert!(render_line(&spec, &glyphs).is_err());
}

#[test]
fn sampled_skew_is_centered_and_bounded() {
    let specs = sample_specs(
        &corpus_lines(),
        10_000,
        0x51e9,
        &DistortionRanges::default(),
        "builtin",
    )
    .unwrap();
    let mut sum = 0.0;
    for spec in &specs {
        let skew = spec.distortion.skew_deg;
        assert!((-10.0..=10.0).contains(&skew));
        sum += skew;
    }
    let mean = sum / specs.len() as f64;
    assert!(mean.abs() <= 0.5, "skew mean {mean:.3} not centered");
}
