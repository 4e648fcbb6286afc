//! FCA behavioral properties: bit-exact order independence, split/merge
//! tolerance, bounds, and exact character accounting on randomized pages.

use lineval_core::fca::{fca, FcaParams};
use lineval_core::metrics::page_crr;
use lineval_core::model::{PageAnnotation, TextLine};
use lineval_core::normalize::{normalize_text, NormalizationPolicy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &[
    "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog", "pack", "my", "box", "with",
    "five", "dozen", "liquor", "jugs", "sphinx", "of", "black", "quartz", "judge", "vow",
];

fn random_line(rng: &mut ChaCha8Rng) -> String {
    let words = rng.random_range(3..=9);
    (0..words)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

fn make_page(page_id: &str, texts: &[String]) -> PageAnnotation {
    PageAnnotation {
        page_id: page_id.into(),
        image_ref: None,
        width: None,
        height: None,
        lines: texts
            .iter()
            .enumerate()
            .map(|(i, t)| TextLine::text_only(format!("line-{i}"), i as u32, t.as_str()))
            .collect(),
    }
}

/// Corrupt roughly `rate` of the characters of a line.
fn corrupt(rng: &mut ChaCha8Rng, text: &str, rate: f64) -> String {
    text.chars()
        .map(|c| {
            if c != ' ' && rng.random::<f64>() < rate {
                char::from(b'a' + rng.random_range(0..26u8))
            } else {
                c
            }
        })
        .collect()
}

/// Shuffle reading order while keeping each line's identity (id and text).
fn permuted(page: &PageAnnotation, rng: &mut ChaCha8Rng) -> PageAnnotation {
    let mut order: Vec<u32> = (0..page.lines.len() as u32).collect();
    order.shuffle(rng);
    let mut out = page.clone();
    for (line, &ix) in out.lines.iter_mut().zip(order.iter()) {
        line.order_index = ix;
    }
    out
}

#[test]
fn fca_is_bit_identical_under_permutations() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfca0);

    for page_ix in 0..40 {
        let n_lines = rng.random_range(5..=30);
        let gt_texts: Vec<String> = (0..n_lines).map(|_| random_line(&mut rng)).collect();
        let pred_texts: Vec<String> = gt_texts
            .iter()
            .map(|t| corrupt(&mut rng, t, 0.08))
            .collect();
        let gt = make_page(&format!("p{page_ix}"), &gt_texts);
        let pred = make_page(&format!("p{page_ix}"), &pred_texts);

        let (baseline, _) = fca(&gt, &pred, &policy, &params);
        for _ in 0..6 {
            let shuffled = permuted(&pred, &mut rng);
            let (value, _) = fca(&gt, &shuffled, &policy, &params);
            assert_eq!(
                value.value.to_bits(),
                baseline.value.to_bits(),
                "FCA changed under permutation on page {page_ix}"
            );
            assert_eq!(value.counts, baseline.counts);
        }
    }
}

#[test]
fn page_crr_is_order_sensitive_where_fca_is_not() {
    let policy = NormalizationPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc110);
    let mut differing = 0;
    let mut nontrivial = 0;

    for page_ix in 0..30 {
        let n_lines = rng.random_range(5..=20);
        let gt_texts: Vec<String> = (0..n_lines).map(|_| random_line(&mut rng)).collect();
        let gt = make_page(&format!("p{page_ix}"), &gt_texts);
        let pred = gt.clone();
        let base_crr = page_crr(&gt, &pred, &policy).value;

        for _ in 0..4 {
            let shuffled = permuted(&pred, &mut rng);
            let same_order = shuffled
                .lines_in_order()
                .iter()
                .map(|l| l.id.clone())
                .collect::<Vec<_>>()
                == pred
                    .lines_in_order()
                    .iter()
                    .map(|l| l.id.clone())
                    .collect::<Vec<_>>();
            if same_order {
                continue;
            }
            nontrivial += 1;
            if page_crr(&gt, &shuffled, &policy).value != base_crr {
                differing += 1;
            }
        }
    }
    assert!(nontrivial > 50);
    assert!(
        differing as f64 >= 0.95 * nontrivial as f64,
        "CRR failed to react to {differing}/{nontrivial} shuffles"
    );
}

#[test]
fn split_and_merge_score_perfectly() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();

    let gt = make_page("p", &["hello world".to_string()]);
    let pred = make_page("p", &["hello".to_string(), "world".to_string()]);
    let (value, _) = fca(&gt, &pred, &policy, &params);
    assert_eq!(value.value, 1.0);

    let gt2 = make_page("p", &["hello".to_string(), "world".to_string()]);
    let pred2 = make_page("p", &["hello world".to_string()]);
    let (value2, _) = fca(&gt2, &pred2, &policy, &params);
    assert_eq!(value2.value, 1.0);
}

#[test]
fn three_way_split_still_perfect() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();
    let gt = make_page("p", &["alpha beta gamma delta".to_string()]);
    let pred = make_page(
        "p",
        &[
            "alpha".to_string(),
            "beta gamma".to_string(),
            "delta".to_string(),
        ],
    );
    let (value, _) = fca(&gt, &pred, &policy, &params);
    assert_eq!(value.value, 1.0);
}

#[test]
fn fca_stays_in_unit_interval_and_accounts_every_char() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc0);

    for case in 0..60 {
        let gt_texts: Vec<String> = (0..rng.random_range(0..=12))
            .map(|_| random_line(&mut rng))
            .collect();
        // Predictions range from empty to heavily corrupted to unrelated.
        let pred_texts: Vec<String> = match case % 4 {
            0 => vec![],
            1 => gt_texts.iter().map(|t| corrupt(&mut rng, t, 0.5)).collect(),
            2 => (0..rng.random_range(1..=12))
                .map(|_| random_line(&mut rng))
                .collect(),
            _ => gt_texts.clone(),
        };
        let gt = make_page("p", &gt_texts);
        let pred = make_page("p", &pred_texts);
        let (value, set) = fca(&gt, &pred, &policy, &params);

        assert!((0.0..=1.0).contains(&value.value), "FCA out of range");

        let gt_total: u64 = gt_texts
            .iter()
            .map(|t| normalize_text(t, &policy).chars().count() as u64)
            .sum();
        let pred_total: u64 = pred_texts
            .iter()
            .map(|t| normalize_text(t, &policy).chars().count() as u64)
            .sum();
        assert_eq!(set.accounted_gt_chars(), gt_total, "gt chars leaked");
        assert_eq!(set.accounted_pred_chars(), pred_total, "pred chars leaked");
    }
}

#[test]
fn fca_is_one_iff_cover_is_perfect() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();

    // Perfect cover in scrambled order: exactly 1.0.
    let gt = make_page(
        "p",
        &["first line".to_string(), "second line".to_string()],
    );
    let mut pred = gt.clone();
    pred.lines[0].order_index = 1;
    pred.lines[1].order_index = 0;
    let (value, set) = fca(&gt, &pred, &policy, &params);
    assert_eq!(value.value, 1.0);
    let pooled = set.pooled_counts();
    assert_eq!(pooled.distance(), 0);

    // One wrong character anywhere: strictly below 1.0.
    let mut pred_bad = gt.clone();
    pred_bad.lines[1].text = "second lime".into();
    let (value_bad, set_bad) = fca(&gt, &pred_bad, &policy, &params);
    assert!(value_bad.value < 1.0);
    assert!(set_bad.pooled_counts().distance() > 0);
}

#[test]
fn weird_whitespace_lines_do_not_break_accounting() {
    let policy = NormalizationPolicy::default();
    let params = FcaParams::default();
    let gt = make_page(
        "p",
        &["   ".to_string(), "real content".to_string(), String::new()],
    );
    let pred = make_page("p", &["real   content".to_string(), "  ".to_string()]);
    let (value, _) = fca(&gt, &pred, &policy, &params);
    assert_eq!(value.value, 1.0);
}
