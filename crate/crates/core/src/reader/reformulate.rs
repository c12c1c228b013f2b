use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved token placed between the question and each passage.
pub const SEPARATOR: &str = "[SEP]";

/// The question followed by retrieved passages, cut to a token budget.
///
/// Tokens are whitespace-separated words; the separator counts as one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReformulatedQuery {
    pub question: String,
    /// Passage texts as they appear in `rendered`, in rank order, one per
    /// consumed input passage (blank inputs stay blank). The last one may be
    /// tail-truncated.
    pub passages: Vec<String>,
    /// How many of the input passages (from the front) made it in.
    pub passages_kept: usize,
    pub token_budget: usize,
    pub truncated: bool,
    pub rendered: String,
}

impl ReformulatedQuery {
    pub fn token_count(&self) -> usize {
        self.rendered.split_whitespace().count()
    }
}

/// Builds `question [SEP] p1 [SEP] p2 ...` within `budget` tokens.
///
/// Passages are appended in the given order. The first passage that does
/// not fit is cut at a token boundary, and everything after it is dropped.
/// A passage is only added if at least one of its tokens fits after the
/// separator. The question is never cut.
///
/// With a 20-token question and five 100-token passages under a 512 budget,
/// the first four passages use 20 + 4 * 101 = 424 tokens, the fifth gets a
/// separator plus 87 of its 100 tokens, and 13 tokens are cut.
pub fn reformulate<S: AsRef<str>>(question: &str, passages: &[S], budget: usize) -> Result<ReformulatedQuery> {
    let q_tokens: Vec<&str> = question.split_whitespace().collect();
    if budget <= q_tokens.len() + 1 {
        return Err(Error::Budget { budget, question_tokens: q_tokens.len() });
    }

    let mut rendered: Vec<&str> = q_tokens.clone();
    let mut kept = Vec::new();
    let mut truncated = false;
    let mut remaining = budget - q_tokens.len();

    for (i, passage) in passages.iter().enumerate() {
        let tokens: Vec<&str> = passage.as_ref().split_whitespace().collect();
        if tokens.is_empty() {
            kept.push(String::new());
            continue;
        }
        if remaining < 2 {
            truncated = passages[i..].iter().any(|p| !p.as_ref().trim().is_empty());
            break;
        }
        let take = tokens.len().min(remaining - 1);
        rendered.push(SEPARATOR);
        rendered.extend_from_slice(&tokens[..take]);
        kept.push(tokens[..take].join(" "));
        remaining -= take + 1;
        if take < tokens.len() {
            truncated = true;
            break;
        }
    }

    let passages_kept = kept.len();
    Ok(ReformulatedQuery {
        question: q_tokens.join(" "),
        passages: kept,
        passages_kept,
        token_budget: budget,
        truncated,
        rendered: rendered.join(" "),
    })
}
