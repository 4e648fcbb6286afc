//! Glyph sources: pre-rasterized character bitmaps with advance widths.
//!
//! Glyphs are consumed as atlases (a JSON index plus a grayscale PNG
//! sheet) rather than font files, so no font-shaping engine is needed. A
//! deterministic builtin source covers the full `english95_space` charset
//! for tests and quick starts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::{builtin_charset, ENGLISH95_SPACE};
use crate::synth::raster::GrayImage;

/// Codepoint used as the fallback glyph by the builtin source.
pub const FALLBACK_CHAR: char = '\u{25a1}'; // white square

/// One monochrome glyph bitmap. Coverage is 0 (no ink) to 255 (full ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub width: u32,
    pub height: u32,
    pub advance: u32,
    pub coverage: Vec<u8>,
}

/// A set of glyphs with a common line height and an optional fallback for
/// characters without their own bitmap.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphSource {
    id: String,
    line_height: u32,
    glyphs: BTreeMap<char, Glyph>,
    fallback: Option<char>,
}

impl GlyphSource {
    pub fn new(
        id: impl Into<String>,
        line_height: u32,
        glyphs: BTreeMap<char, Glyph>,
        fallback: Option<char>,
    ) -> Result<Self> {
        let id = id.into();
        if line_height == 0 {
            return Err(Error::Atlas(format!("glyph source `{id}`: zero line height")));
        }
        if let Some(fb) = fallback {
            if !glyphs.contains_key(&fb) {
                return Err(Error::Atlas(format!(
                    "glyph source `{id}`: fallback {fb:?} has no glyph"
                )));
            }
        }
        if let Some((c, _)) = glyphs.iter().find(|(_, g)| g.advance == 0) {
            return Err(Error::Atlas(format!(
                "glyph source `{id}`: glyph {c:?} has zero advance"
            )));
        }
        Ok(GlyphSource {
            id,
            line_height,
            glyphs,
            fallback,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn line_height(&self) -> u32 {
        self.line_height
    }

    /// The glyph for `c`, or the fallback glyph when `c` has none.
    pub fn glyph(&self, c: char) -> Option<&Glyph> {
        self.glyphs
            .get(&c)
            .or_else(|| self.fallback.and_then(|fb| self.glyphs.get(&fb)))
    }

    /// Deterministic builtin source: a blocky dot-matrix face covering
    /// `english95_space`, derived from each codepoint so it needs no font
    /// files. Glyph shapes are arbitrary but stable across runs and
    /// platforms.
    pub fn builtin() -> GlyphSource {
        const CELL_W: u32 = 8;
        const CELL_H: u32 = 16;
        let mut glyphs = BTreeMap::new();
        let charset = builtin_charset(ENGLISH95_SPACE).expect("builtin charset exists");
        for c in charset.chars() {
            let glyph = if c == ' ' {
                Glyph {
                    width: CELL_W,
                    height: CELL_H,
                    advance: CELL_W,
                    coverage: vec![0; (CELL_W * CELL_H) as usize],
                }
            } else {
                dot_matrix_glyph(c, CELL_W, CELL_H)
            };
            glyphs.insert(c, glyph);
        }
        glyphs.insert(FALLBACK_CHAR, outline_glyph(CELL_W, CELL_H));
        GlyphSource {
            id: "builtin".into(),
            line_height: CELL_H,
            glyphs,
            fallback: Some(FALLBACK_CHAR),
        }
    }

    /// Write the source as `atlas.json` + `atlas.png` in `dir`.
    pub fn save_atlas(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let sheet_w: u32 = self.glyphs.values().map(|g| g.width).sum::<u32>().max(1);
        let sheet_h = self
            .glyphs
            .values()
            .map(|g| g.height)
            .max()
            .unwrap_or(self.line_height);
        let mut sheet = GrayImage::new(sheet_w, sheet_h, 0);
        let mut index = AtlasIndex {
            id: self.id.clone(),
            line_height: self.line_height,
            fallback: self.fallback.map(|c| c as u32),
            glyphs: BTreeMap::new(),
        };
        let mut cursor = 0u32;
        for (&c, glyph) in &self.glyphs {
            for y in 0..glyph.height {
                for x in 0..glyph.width {
                    sheet.set(
                        cursor + x,
                        y,
                        glyph.coverage[(y * glyph.width + x) as usize],
                    );
                }
            }
            index.glyphs.insert(
                (c as u32).to_string(),
                AtlasGlyph {
                    x: cursor,
                    y: 0,
                    width: glyph.width,
                    height: glyph.height,
                    advance: glyph.advance,
                },
            );
            cursor += glyph.width;
        }
        sheet.save_png(&dir.join("atlas.png"))?;
        let json =
            serde_json::to_string_pretty(&index).expect("atlas index serialization cannot fail");
        fs::write(dir.join("atlas.json"), json)?;
        Ok(())
    }

    /// Load `atlas.json` + `atlas.png` from `dir`.
    pub fn load_atlas(dir: &Path) -> Result<GlyphSource> {
        let index_path = dir.join("atlas.json");
        let raw = fs::read_to_string(&index_path)?;
        let index: AtlasIndex = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: index_path.clone(),
            detail: e.to_string(),
        })?;
        let sheet = GrayImage::load_png(&dir.join("atlas.png"))?;

        let mut glyphs = BTreeMap::new();
        for (codepoint, meta) in &index.glyphs {
            let cp: u32 = codepoint.parse().map_err(|_| {
                Error::Atlas(format!("bad codepoint key `{codepoint}` in atlas index"))
            })?;
            let c = char::from_u32(cp)
                .ok_or_else(|| Error::Atlas(format!("invalid codepoint U+{cp:X}")))?;
            if meta.x + meta.width > sheet.width || meta.y + meta.height > sheet.height {
                return Err(Error::Atlas(format!(
                    "glyph {c:?} rect exceeds the {}x{} sheet",
                    sheet.width, sheet.height
                )));
            }
            let mut coverage = Vec::with_capacity((meta.width * meta.height) as usize);
            for y in 0..meta.height {
                for x in 0..meta.width {
                    coverage.push(sheet.get(meta.x + x, meta.y + y));
                }
            }
            glyphs.insert(
                c,
                Glyph {
                    width: meta.width,
                    height: meta.height,
                    advance: meta.advance,
                    coverage,
                },
            );
        }
        let fallback = index
            .fallback
            .map(|cp| {
                char::from_u32(cp)
                    .ok_or_else(|| Error::Atlas(format!("invalid fallback codepoint U+{cp:X}")))
            })
            .transpose()?;
        GlyphSource::new(index.id, index.line_height, glyphs, fallback)
    }
}

#[derive(Serialize, Deserialize)]
struct AtlasIndex {
    id: String,
    line_height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fallback: Option<u32>,
    glyphs: BTreeMap<String, AtlasGlyph>,
}

#[derive(Serialize, Deserialize)]
struct AtlasGlyph {
    x: u32,
    y: u32,
    width: u32,
    height: u32,
    advance: u32,
}

/// 6x10 dot matrix seeded from the codepoint, upscaled into the cell.
fn dot_matrix_glyph(c: char, cell_w: u32, cell_h: u32) -> Glyph {
    const DOTS_W: u32 = 6;
    const DOTS_H: u32 = 10;
    let mut state = c as u64;
    let mut bits = Vec::with_capacity((DOTS_W * DOTS_H) as usize);
    for _ in 0..DOTS_W * DOTS_H {
        state = splitmix64(state);
        bits.push(state & 1 == 1);
    }
    // Guarantee enough ink for any character so lines never render blank.
    if bits.iter().filter(|&&b| b).count() < 18 {
        for row in 0..DOTS_H {
            bits[(row * DOTS_W + DOTS_W / 2) as usize] = true;
        }
    }
    let mut coverage = vec![0u8; (cell_w * cell_h) as usize];
    let (off_x, off_y) = (1u32, 3u32);
    for row in 0..DOTS_H {
        for col in 0..DOTS_W {
            if bits[(row * DOTS_W + col) as usize] {
                let (x, y) = (off_x + col, off_y + row);
                if x < cell_w && y < cell_h {
                    coverage[(y * cell_w + x) as usize] = 255;
                }
            }
        }
    }
    Glyph {
        width: cell_w,
        height: cell_h,
        advance: cell_w,
        coverage,
    }
}

/// Hollow rectangle used as the fallback glyph.
fn outline_glyph(cell_w: u32, cell_h: u32) -> Glyph {
    let mut coverage = vec![0u8; (cell_w * cell_h) as usize];
    for x in 1..cell_w - 1 {
        coverage[(3 * cell_w + x) as usize] = 255;
        coverage[((cell_h - 4) * cell_w + x) as usize] = 255;
    }
    for y in 3..cell_h - 3 {
        coverage[(y * cell_w + 1) as usize] = 255;
        coverage[(y * cell_w + cell_w - 2) as usize] = 255;
    }
    Glyph {
        width: cell_w,
        height: cell_h,
        advance: cell_w,
        coverage,
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_english95_space() {
        let source = GlyphSource::builtin();
        let charset = builtin_charset(ENGLISH95_SPACE).unwrap();
        for c in charset.chars() {
            assert!(source.glyph(c).is_some(), "missing glyph for {c:?}");
        }
    }

    #[test]
    fn builtin_glyphs_have_ink_except_space() {
        let source = GlyphSource::builtin();
        for c in ['a', 'Z', '!', '€'] {
            let glyph = source.glyph(c).unwrap();
            let ink: u64 = glyph.coverage.iter().map(|&v| v as u64).sum();
            assert!(ink > 0, "glyph {c:?} is blank");
        }
        let space = source.glyph(' ').unwrap();
        assert!(space.coverage.iter().all(|&v| v == 0));
    }

    #[test]
    fn fallback_serves_unmapped_characters() {
        let source = GlyphSource::builtin();
        let fb = source.glyph('\u{4e2d}').unwrap();
        assert_eq!(fb, source.glyph(FALLBACK_CHAR).unwrap());
    }

    #[test]
    fn atlas_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let source = GlyphSource::builtin();
        source.save_atlas(dir.path()).unwrap();
        let loaded = GlyphSource::load_atlas(dir.path()).unwrap();
        assert_eq!(loaded, source);
    }

    #[test]
    fn zero_advance_rejected() {
        let mut glyphs = BTreeMap::new();
        glyphs.insert(
            'a',
            Glyph {
                width: 2,
                height: 2,
                advance: 0,
                coverage: vec![0; 4],
            },
        );
        assert!(GlyphSource::new("bad", 2, glyphs, None).is_err());
    }
}
