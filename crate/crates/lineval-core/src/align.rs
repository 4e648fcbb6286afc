//! Edit-distance kernels: full alignment with error-category counts, plus
//! bit-parallel Myers distance routines for the hot scanning paths.
//!
//! `align` is the canonical kernel: one optimal unit-cost edit script with
//! deterministic tie-breaking, reduced to (S, D, I, C) counts. The Myers
//! routines compute distances only and are used where counts are not needed
//! (pair scanning in FCA matching, argmin scans in reference-guided
//! reordering); they agree with the DP kernels on every input.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Error-category counts from one optimal edit script, reference vs
/// hypothesis: substitutions, deletions (reference characters missing from
/// the hypothesis), insertions (hypothesis characters not in the
/// reference), and correct characters.
///
/// Invariants: `S + D + C` equals the reference length in characters and
/// `S + D + I` is the minimum unit-cost edit distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentCounts {
    pub substitutions: u64,
    pub deletions: u64,
    pub insertions: u64,
    pub correct: u64,
}

impl AlignmentCounts {
    /// Reference length N = S + D + C.
    pub fn reference_len(&self) -> u64 {
        self.substitutions + self.deletions + self.correct
    }

    /// Minimum edit distance S + D + I.
    pub fn distance(&self) -> u64 {
        self.substitutions + self.deletions + self.insertions
    }

    /// Pool counts from another alignment into this one.
    pub fn absorb(&mut self, other: &AlignmentCounts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.correct += other.correct;
    }

    /// Same alignment viewed from the other side: deletions and insertions
    /// swap roles.
    pub fn swapped_sides(&self) -> AlignmentCounts {
        AlignmentCounts {
            substitutions: self.substitutions,
            deletions: self.insertions,
            insertions: self.deletions,
            correct: self.correct,
        }
    }
}

// Traceback codes, in tie-break preference order.
const TB_MATCH: u8 = 0;
const TB_SUB: u8 = 1;
const TB_DEL: u8 = 2; // up: reference char unmatched
const TB_INS: u8 = 3; // left: hypothesis char unmatched

/// Align `hypothesis` against `reference` with unit costs and return the
/// counts of one optimal edit script.
///
/// When several scripts are optimal, ties are broken cell by cell by
/// preferring match over substitution over deletion over insertion, so the
/// counts are deterministic.
pub fn align(reference: &str, hypothesis: &str) -> AlignmentCounts {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    align_chars(&r, &h)
}

pub(crate) fn align_chars(r: &[char], h: &[char]) -> AlignmentCounts {
    // Equal inputs take the all-match script under the preference rule.
    if r == h {
        return AlignmentCounts {
            correct: r.len() as u64,
            ..Default::default()
        };
    }
    let m = r.len();
    let n = h.len();
    let stride = n + 1;
    let mut tb = vec![TB_INS; (m + 1) * stride];
    let mut prev: Vec<u32> = (0..=n as u32).collect();
    let mut cur: Vec<u32> = vec![0; n + 1];

    for i in 1..=m {
        cur[0] = i as u32;
        let rc = r[i - 1];
        let row = &mut tb[i * stride..(i + 1) * stride];
        row[0] = TB_DEL;
        let mut diag = prev[0];
        let mut left = i as u32;
        let cells = h
            .iter()
            .zip(prev[1..].iter())
            .zip(cur[1..].iter_mut().zip(row[1..].iter_mut()));
        for ((&hc, &up), (cell, code_slot)) in cells {
            let (val, code) = if rc == hc {
                // A diagonal match is always minimal here, and match is
                // the most preferred operation.
                (diag, TB_MATCH)
            } else {
                let mut best = diag + 1;
                let mut code = TB_SUB;
                let del = up + 1;
                if del < best {
                    best = del;
                    code = TB_DEL;
                }
                let ins = left + 1;
                if ins < best {
                    best = ins;
                    code = TB_INS;
                }
                (best, code)
            };
            *cell = val;
            *code_slot = code;
            diag = up;
            left = val;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut counts = AlignmentCounts::default();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        match tb[i * stride + j] {
            TB_MATCH => {
                counts.correct += 1;
                i -= 1;
                j -= 1;
            }
            TB_SUB => {
                counts.substitutions += 1;
                i -= 1;
                j -= 1;
            }
            TB_DEL => {
                counts.deletions += 1;
                i -= 1;
            }
            _ => {
                counts.insertions += 1;
                j -= 1;
            }
        }
    }
    counts
}

/// Unit-cost Levenshtein distance, bit-parallel.
pub fn levenshtein(a: &str, b: &str) -> u64 {
    let ac: Vec<char> = a.chars().collect();
    let bc: Vec<char> = b.chars().collect();
    levenshtein_chars(&ac, &bc)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> u64 {
    // Fewer blocks when the pattern is the shorter string.
    let (pattern, text) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if pattern.is_empty() {
        return text.len() as u64;
    }
    let mut state = MyersState::new(pattern);
    let mut score = pattern.len() as i64;
    for &c in text {
        score += i64::from(state.advance(c, 1));
    }
    score as u64
}

/// Minimum edit distance of `pattern` against any contiguous window of
/// `text` (free end-gaps on the text side), used to locate one line's
/// text inside another.
pub fn semi_global_levenshtein(pattern: &str, text: &str) -> u64 {
    let pc: Vec<char> = pattern.chars().collect();
    let tc: Vec<char> = text.chars().collect();
    semi_global_distance(&pc, &tc)
}

/// Minimum distance of `pattern` against any contiguous window of `text`
/// (free end-gaps on `text`). The empty window is allowed, so the result
/// never exceeds `pattern.len()`.
pub(crate) fn semi_global_distance(pattern: &[char], text: &[char]) -> u64 {
    if pattern.is_empty() {
        return 0;
    }
    let mut state = MyersState::new(pattern);
    let mut score = pattern.len() as i64;
    let mut best = score;
    for &c in text {
        score += i64::from(state.advance(c, 0));
        best = best.min(score);
    }
    best as u64
}

/// Block-based Myers/Hyyrö bit-parallel state for one pattern.
struct MyersState {
    blocks: usize,
    last_bit: u32,
    ascii_eq: Vec<u64>,
    other_eq: HashMap<char, Vec<u64>>,
    zero: Vec<u64>,
    vp: Vec<u64>,
    vn: Vec<u64>,
}

impl MyersState {
    fn new(pattern: &[char]) -> Self {
        debug_assert!(!pattern.is_empty());
        let m = pattern.len();
        let blocks = m.div_ceil(64);
        let mut ascii_eq = vec![0u64; 128 * blocks];
        let mut other_eq: HashMap<char, Vec<u64>> = HashMap::new();
        for (i, &c) in pattern.iter().enumerate() {
            let (block, bit) = (i / 64, i % 64);
            if (c as u32) < 128 {
                ascii_eq[(c as usize) * blocks + block] |= 1 << bit;
            } else {
                other_eq.entry(c).or_insert_with(|| vec![0; blocks])[block] |= 1 << bit;
            }
        }
        MyersState {
            blocks,
            last_bit: ((m - 1) % 64) as u32,
            ascii_eq,
            other_eq,
            zero: vec![0; blocks],
            vp: vec![!0u64; blocks],
            vn: vec![0u64; blocks],
        }
    }

    fn eq_row(&self, c: char) -> &[u64] {
        if (c as u32) < 128 {
            let start = (c as usize) * self.blocks;
            &self.ascii_eq[start..start + self.blocks]
        } else {
            self.other_eq
                .get(&c)
                .map(Vec::as_slice)
                .unwrap_or(&self.zero)
        }
    }

    /// Process one text character. `hin0` is the horizontal delta entering
    /// the first row: +1 for global distance, 0 for free text gaps.
    /// Returns the delta of the bottom matrix cell.
    fn advance(&mut self, c: char, hin0: i32) -> i32 {
        let blocks = self.blocks;
        let mut hin = hin0;
        for b in 0..blocks {
            let eq = if (c as u32) < 128 {
                self.ascii_eq[(c as usize) * blocks + b]
            } else {
                self.eq_row(c)[b]
            };
            let out_bit = if b + 1 == blocks { self.last_bit } else { 63 };
            hin = block_step(&mut self.vp[b], &mut self.vn[b], eq, hin, out_bit);
        }
        hin
    }
}

#[inline]
fn block_step(pv: &mut u64, mv: &mut u64, eq: u64, hin: i32, out_bit: u32) -> i32 {
    let hin_neg = u64::from(hin < 0);
    let xv = eq | *mv;
    let eq = eq | hin_neg;
    let xh = (((eq & *pv).wrapping_add(*pv)) ^ *pv) | eq;
    let mut ph = *mv | !(xh | *pv);
    let mut mh = *pv & xh;
    let hout = ((ph >> out_bit) & 1) as i32 - ((mh >> out_bit) & 1) as i32;
    ph <<= 1;
    mh <<= 1;
    ph |= u64::from(hin > 0);
    mh |= hin_neg;
    *pv = mh | !(xv | ph);
    *mv = ph & xv;
    hout
}

/// A semi-global alignment of a full `pattern` against a window of `text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SemiGlobalAlignment {
    /// Window start in `text`, in characters.
    pub start: usize,
    /// Window end in `text`, exclusive.
    pub end: usize,
    pub distance: u64,
    /// Counts with the pattern as the reference side.
    pub counts: AlignmentCounts,
}

/// Full semi-global DP with traceback: locate the window of `text` that
/// `pattern` best aligns to and return the aligned counts.
///
/// The window end is the smallest position achieving the minimum distance;
/// within the window, ties follow the same match > substitution > deletion
/// > insertion preference as [`align`].
pub(crate) fn semi_global_align(pattern: &[char], text: &[char]) -> SemiGlobalAlignment {
    let m = pattern.len();
    let n = text.len();
    if m == 0 {
        return SemiGlobalAlignment {
            start: 0,
            end: 0,
            distance: 0,
            counts: AlignmentCounts::default(),
        };
    }
    let stride = n + 1;
    let mut dp = vec![0u32; (m + 1) * stride];
    let mut tb = vec![TB_INS; (m + 1) * stride];
    for i in 1..=m {
        dp[i * stride] = i as u32;
        tb[i * stride] = TB_DEL;
        let pc = pattern[i - 1];
        for j in 1..=n {
            let diag = dp[(i - 1) * stride + j - 1];
            let (best, code) = if pc == text[j - 1] {
                (diag, TB_MATCH)
            } else {
                let mut best = diag + 1;
                let mut code = TB_SUB;
                let del = dp[(i - 1) * stride + j] + 1;
                if del < best {
                    best = del;
                    code = TB_DEL;
                }
                let ins = dp[i * stride + j - 1] + 1;
                if ins < best {
                    best = ins;
                    code = TB_INS;
                }
                (best, code)
            };
            dp[i * stride + j] = best;
            tb[i * stride + j] = code;
        }
    }

    let last_row = &dp[m * stride..];
    let mut end = 0;
    let mut distance = last_row[0];
    for (j, &d) in last_row.iter().enumerate() {
        if d < distance {
            distance = d;
            end = j;
        }
    }

    let mut counts = AlignmentCounts::default();
    let (mut i, mut j) = (m, end);
    while i > 0 {
        match tb[i * stride + j] {
            TB_MATCH => {
                counts.correct += 1;
                i -= 1;
                j -= 1;
            }
            TB_SUB => {
                counts.substitutions += 1;
                i -= 1;
                j -= 1;
            }
            TB_DEL => {
                counts.deletions += 1;
                i -= 1;
            }
            _ => {
                counts.insertions += 1;
                j -= 1;
            }
        }
    }

    SemiGlobalAlignment {
        start: j,
        end,
        distance: distance as u64,
        counts,
    }
}
