//! Answer-overlap metrics over normalized tokens.
//!
//! All three metrics return values in `[0, 1]` and are generic over
//! [`Fraction`], so they can be computed exactly with rationals as well as
//! with floats.

use std::collections::HashMap;

use crate::scalar::Fraction;

/// Portuguese articles removed during normalization.
pub const ARTICLES: &[&str] = &["o", "a", "os", "as", "um", "uma", "uns", "umas"];

/// Lowercases, drops punctuation, removes standalone Portuguese articles
/// and collapses whitespace.
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let stripped: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    stripped
        .split_whitespace()
        .filter(|w| !ARTICLES.contains(w))
        .collect::<Vec<_>>()
        .join(" ")
}

fn tokens(text: &str) -> Vec<String> {
    normalize_answer(text).split_whitespace().map(str::to_string).collect()
}

/// `2 * matched / (|pred| + |gold|)`, i.e. the harmonic mean of
/// `matched / |pred|` and `matched / |gold|`. Two empty sides score 1, one
/// empty side scores 0.
fn harmonic<T: Fraction>(matched: usize, pred: usize, gold: usize) -> T {
    match (pred, gold) {
        (0, 0) => T::one(),
        (0, _) | (_, 0) => T::zero(),
        _ => T::ratio(2 * matched, pred + gold),
    }
}

/// Token-multiset overlap F1 of normalized answers.
pub fn f1<T: Fraction>(predicted: &str, gold: &str) -> T {
    f1_tokens(&tokens(predicted), &tokens(gold))
}

/// Multiset overlap F1 of already-tokenized sequences.
pub fn f1_tokens<T: Fraction, S: AsRef<str>>(pred: &[S], gold: &[S]) -> T {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in gold {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let mut overlap = 0;
    for t in pred {
        if let Some(c) = counts.get_mut(t.as_ref()).filter(|c| **c > 0) {
            *c -= 1;
            overlap += 1;
        }
    }
    harmonic(overlap, pred.len(), gold.len())
}

pub fn exact_match<T: Fraction>(predicted: &str, gold: &str) -> T {
    if normalize_answer(predicted) == normalize_answer(gold) {
        T::one()
    } else {
        T::zero()
    }
}

/// Length of the longest common subsequence of two token sequences.
pub fn lcs_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// Rouge-L F-measure (beta = 1) over normalized tokens.
pub fn rouge_l<T: Fraction>(predicted: &str, gold: &str) -> T {
    rouge_l_tokens(&tokens(predicted), &tokens(gold))
}

/// Rouge-L F-measure of already-tokenized sequences.
pub fn rouge_l_tokens<T: Fraction, S: PartialEq>(pred: &[S], gold: &[S]) -> T {
    harmonic(lcs_len(pred, gold), pred.len(), gold.len())
}
