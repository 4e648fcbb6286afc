//! Corpus statistics: character frequency and words-per-line distributions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::Corpus;
use crate::normalize::{normalize_text, NormalizationPolicy};

/// Ordered labelled bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<(String, u64)>,
    pub total: u64,
}

impl Histogram {
    pub fn count(&self, label: &str) -> u64 {
        self.bins
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, n)| n)
            .unwrap_or(0)
    }
}

/// Character frequency over all normalized line texts, bins sorted by
/// descending count and then by codepoint. The total equals the corpus's
/// normalized character count.
pub fn char_frequency(corpus: &Corpus, policy: &NormalizationPolicy) -> Histogram {
    let mut counts: HashMap<char, u64> = HashMap::new();
    for page in &corpus.pages {
        for line in &page.lines {
            for c in normalize_text(&line.text, policy).chars() {
                *counts.entry(c).or_default() += 1;
            }
        }
    }
    let mut bins: Vec<(char, u64)> = counts.into_iter().collect();
    bins.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let total = bins.iter().map(|&(_, n)| n).sum();
    Histogram {
        bins: bins.into_iter().map(|(c, n)| (c.to_string(), n)).collect(),
        total,
    }
}

/// Words-per-line distribution: a word is a maximal non-space run of the
/// normalized text. Bins are keyed by the word count and sorted
/// numerically; the total is the number of lines.
pub fn words_per_line(corpus: &Corpus, policy: &NormalizationPolicy) -> Histogram {
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for page in &corpus.pages {
        for line in &page.lines {
            let words = normalize_text(&line.text, policy)
                .split_whitespace()
                .count();
            *counts.entry(words).or_default() += 1;
        }
    }
    let mut bins: Vec<(usize, u64)> = counts.into_iter().collect();
    bins.sort_by_key(|&(words, _)| words);
    let total = bins.iter().map(|&(_, n)| n).sum();
    Histogram {
        bins: bins
            .into_iter()
            .map(|(w, n)| (w.to_string(), n))
            .collect(),
        total,
    }
}
