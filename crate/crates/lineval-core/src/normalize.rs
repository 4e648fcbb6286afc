//! Text normalization applied uniformly before any metric is computed:
//! Unicode NFC, case folding, charset filtering, whitespace collapsing.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A closed set of scorable characters.
///
/// Space membership is explicit: the builtin `english95` set does not
/// contain U+0020, while `english95_space` does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Charset {
    name: String,
    members: BTreeSet<char>,
}

impl Charset {
    pub fn from_chars(name: impl Into<String>, chars: impl IntoIterator<Item = char>) -> Self {
        Charset {
            name: name.into(),
            members: chars.into_iter().collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, c: char) -> bool {
        self.members.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in codepoint order.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.members.iter().copied()
    }
}

impl fmt::Display for Charset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} chars)", self.name, self.members.len())
    }
}

/// The 95-character English recognition charset used by word-level models:
/// the 94 printable ASCII characters U+0021..U+007E plus the euro sign,
/// without space. The upstream set is not enumerated anywhere public, so
/// the euro sign completes the count; pass a charset file to override.
pub const ENGLISH95: &str = "english95";
/// `english95` extended with U+0020, the charset line-level models use.
pub const ENGLISH95_SPACE: &str = "english95_space";

/// Look up a builtin charset by name.
pub fn builtin_charset(name: &str) -> Result<Charset> {
    let base = ('\u{21}'..='\u{7e}').chain(std::iter::once('\u{20ac}'));
    match name {
        ENGLISH95 => Ok(Charset::from_chars(ENGLISH95, base)),
        ENGLISH95_SPACE => Ok(Charset::from_chars(
            ENGLISH95_SPACE,
            base.chain(std::iter::once(' ')),
        )),
        other => Err(Error::UnknownCharset(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnicodeForm {
    Nfc,
    None,
}

/// How raw annotation text is normalized before scoring.
///
/// Steps run in a fixed order: Unicode normalization, case folding,
/// charset filtering, whitespace collapsing. Equal inputs under an equal
/// policy always produce identical outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationPolicy {
    pub case_fold: bool,
    pub unicode_form: UnicodeForm,
    /// Characters outside the set are dropped. `None` keeps everything.
    pub charset: Option<Charset>,
    /// Collapse whitespace runs to a single space and trim the ends.
    pub collapse_whitespace: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            case_fold: true,
            unicode_form: UnicodeForm::Nfc,
            charset: None,
            collapse_whitespace: true,
        }
    }
}

impl NormalizationPolicy {
    /// Default policy with a specific charset.
    pub fn with_charset(charset: Charset) -> Self {
        NormalizationPolicy {
            charset: Some(charset),
            ..Default::default()
        }
    }

    /// Short form for report config digests, e.g.
    /// `nfc,fold,charset=english95_space,collapse`.
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        parts.push(match self.unicode_form {
            UnicodeForm::Nfc => "nfc",
            UnicodeForm::None => "raw",
        });
        if self.case_fold {
            parts.push("fold");
        }
        let charset;
        match &self.charset {
            Some(cs) => {
                charset = format!("charset={}", cs.name());
                parts.push(&charset);
            }
            None => parts.push("charset=all"),
        }
        if self.collapse_whitespace {
            parts.push("collapse");
        }
        parts.join(",")
    }
}

/// Normalize one string under a policy.
///
/// Idempotent: `normalize_text(normalize_text(s, p), p) == normalize_text(s, p)`.
/// Whitespace survives charset filtering when collapsing is enabled so that
/// word boundaries are preserved even for charsets without a space member.
pub fn normalize_text(s: &str, policy: &NormalizationPolicy) -> String {
    let composed;
    let mut text: &str = s;
    if policy.unicode_form == UnicodeForm::Nfc {
        composed = icu_normalizer::ComposingNormalizer::new_nfc().normalize(text);
        text = &composed;
    }

    let folded;
    if policy.case_fold {
        folded = text.to_lowercase();
        text = &folded;
    }

    let filtered;
    if let Some(charset) = &policy.charset {
        filtered = text
            .chars()
            .filter(|&c| charset.contains(c) || (policy.collapse_whitespace && c.is_whitespace()))
            .collect::<String>();
        text = &filtered;
    }

    if policy.collapse_whitespace {
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        text.to_string()
    }
}
