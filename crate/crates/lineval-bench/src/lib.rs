//! Deterministic input builders for the kernel benchmarks.

use lineval_core::model::{PageAnnotation, TextLine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz ";

pub fn random_text(rng: &mut ChaCha8Rng, chars: usize) -> String {
    let alphabet: Vec<char> = ALPHABET.chars().collect();
    (0..chars)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect()
}

/// A page of `lines` random lines of `chars` characters each.
pub fn random_page(page_id: &str, lines: usize, chars: usize, seed: u64) -> PageAnnotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PageAnnotation {
        page_id: page_id.into(),
        image_ref: None,
        width: None,
        height: None,
        lines: (0..lines)
            .map(|i| TextLine::text_only(i.to_string(), i as u32, random_text(&mut rng, chars)))
            .collect(),
    }
}

/// Copy of `page` with `flips` random single-character substitutions.
pub fn corrupted_copy(page: &PageAnnotation, flips: usize, seed: u64) -> PageAnnotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = page.clone();
    for _ in 0..flips {
        let li = rng.random_range(0..out.lines.len());
        let mut chars: Vec<char> = out.lines[li].text.chars().collect();
        if chars.is_empty() {
            continue;
        }
        let ci = rng.random_range(0..chars.len());
        chars[ci] = '#';
        out.lines[li].text = chars.into_iter().collect();
    }
    out
}

/// Copy of `page` with its reading order reversed.
pub fn reversed_order(page: &PageAnnotation) -> PageAnnotation {
    let n = page.lines.len() as u32;
    let mut out = page.clone();
    for line in &mut out.lines {
        line.order_index = n - 1 - line.order_index;
    }
    out
}
