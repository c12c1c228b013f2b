//! Deterministic extractive reader used as a model-free baseline.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ReformulatedQuery;
use crate::retriever::tokenize;

pub const DEFAULT_MAX_SPAN: usize = 15;

/// Portuguese function words and interrogatives; never treated as question
/// content.
pub const STOPWORDS: &[&str] = &[
    "a", "à", "ao", "aos", "aquela", "aquelas", "aquele", "aqueles", "aquilo", "as", "às", "até", "com",
    "como", "contra", "cuja", "cujo", "da", "das", "de", "dela", "dele", "deles", "desde", "do", "dos",
    "e", "é", "ela", "elas", "ele", "eles", "em", "entre", "era", "essa", "essas", "esse", "esses", "esta",
    "está", "estão", "estas", "este", "estes", "eu", "foi", "foram", "há", "isso", "isto", "já", "lhe",
    "mais", "mas", "me", "mesmo", "muito", "na", "não", "nas", "nem", "no", "nos", "nós", "num", "numa",
    "o", "onde", "os", "ou", "para", "pela", "pelas", "pelo", "pelos", "por", "qual", "quais", "quando",
    "quanta", "quantas", "quanto", "quantos", "que", "quem", "são", "se", "seu", "seus", "ser", "sua",
    "suas", "também", "tem", "têm", "um", "uma", "umas", "uns",
];

/// Interrogatives whose answer is expected to contain a number.
const NUMERIC_CUES: &[&str] = &["quando", "quantos", "quantas", "quanto", "quanta", "ano"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub text: String,
    /// Rank position (0-based) of the passage the text came from.
    pub passage: usize,
    pub low_confidence: bool,
}

fn is_stopword(term: &str) -> bool {
    STOPWORDS.contains(&term)
}

/// Question terms that are not stopwords.
pub fn content_terms(question: &str) -> HashSet<String> {
    tokenize(question).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// Splits after every `.`, `?` or `!`, keeping the delimiter.
fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if matches!(c, '.' | '?' | '!') {
            let end = i + c.len_utf8();
            if !text[start..end].trim().is_empty() {
                out.push(text[start..end].trim());
            }
            start = end;
        }
    }
    if !text[start..].trim().is_empty() {
        out.push(text[start..].trim());
    }
    out
}

fn touches(token: &str, terms: &HashSet<String>) -> bool {
    tokenize(token).iter().any(|t| terms.contains(t))
}

/// A surface token that carries no content of its own.
fn is_filler(token: &str) -> bool {
    tokenize(token).iter().all(|t| is_stopword(t))
}

fn has_digit(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
}

fn first_tokens(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// Picks the answer span for `rq.question` from `rq.passages`.
///
/// Every sentence of every passage is scored by the number of distinct
/// question content terms it holds; the best one wins, earlier passages and
/// earlier sentences breaking ties. Inside it, the answer is the longest run
/// of consecutive tokens that contain no question term, capped at
/// `max_span` tokens, with filler words trimmed from both ends. When the
/// question asks for a date or quantity, runs holding a digit are preferred.
///
/// If no sentence shares a term with the question, the first `max_span`
/// tokens of the top passage are returned with `low_confidence` set; with no
/// passages at all the answer is empty.
pub fn extractive_answer(rq: &ReformulatedQuery, max_span: usize) -> Extraction {
    let max_span = max_span.max(1);
    let terms = content_terms(&rq.question);
    let question_terms = tokenize(&rq.question);
    let wants_number = question_terms.iter().any(|t| NUMERIC_CUES.contains(&t.as_str()));

    let mut best: Option<(usize, usize, &str)> = None;
    for (pi, passage) in rq.passages.iter().enumerate() {
        for sentence in sentences(passage) {
            let found: HashSet<String> = tokenize(sentence).into_iter().filter(|t| terms.contains(t)).collect();
            if found.len() > best.map_or(0, |b| b.0) {
                best = Some((found.len(), pi, sentence));
            }
        }
    }

    let fallback = |low: bool| {
        let passage = rq.passages.iter().position(|p| !p.trim().is_empty());
        Extraction {
            text: passage.map(|i| first_tokens(&rq.passages[i], max_span)).unwrap_or_default(),
            passage: passage.unwrap_or(0),
            low_confidence: low,
        }
    };
    let Some((_, passage, sentence)) = best else {
        return fallback(true);
    };

    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let mut runs: Vec<&[&str]> = Vec::new();
    let mut start = None;
    for (i, tok) in tokens.iter().enumerate() {
        match (touches(tok, &terms), start) {
            (true, Some(s)) => {
                runs.push(&tokens[s..i]);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(&tokens[s..]);
    }

    let trim = |run: &[&str]| -> (usize, usize) {
        let lo = run.iter().position(|t| !is_filler(t)).unwrap_or(run.len());
        let hi = run.iter().rposition(|t| !is_filler(t)).map_or(lo, |i| i + 1);
        (lo, hi)
    };
    let key = |run: &[&str]| {
        let (lo, hi) = trim(run);
        let numeric = wants_number && run.iter().any(|t| has_digit(t));
        (numeric, (hi - lo).min(max_span))
    };
    let mut chosen: Option<&[&str]> = None;
    for run in runs {
        if chosen.is_none_or(|c| key(run) > key(c)) {
            chosen = Some(run);
        }
    }
    let Some(run) = chosen.filter(|r| trim(r).0 < trim(r).1) else {
        return Extraction {
            text: first_tokens(sentence, max_span),
            passage,
            low_confidence: true,
        };
    };

    let (lo, hi) = trim(run);
    let core = &run[lo..hi];
    let begin = if core.len() <= max_span {
        0
    } else if wants_number {
        core.iter().position(|t| has_digit(t)).unwrap_or(0).min(core.len() - max_span)
    } else {
        0
    };
    let end = (begin + max_span).min(core.len());
    Extraction {
        text: core[begin..end].join(" "),
        passage,
        low_confidence: false,
    }
}
