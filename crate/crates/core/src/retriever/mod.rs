//! Okapi BM25 over an in-memory inverted index of passages.
//!
//! ```text
//! score(P, Q) = sum over distinct t in Q of
//!     idf(t) * tf(t, P) * (k1 + 1) / (tf(t, P) + k1 * (1 - b + b * |P| / avg|P|))
//! idf(t) = ln((N - df(t) + 0.5) / (df(t) + 0.5) + 1)
//! ```
//!
//! The `+ 1` inside the logarithm keeps idf positive even for terms that
//! occur in more than half of the passages.

mod persist;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Passage;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use persist::{load_index, read_index, save_index, write_index, FORMAT_VERSION, MAGIC};

/// Lowercases, treats every non-alphanumeric character as a separator and
/// drops empty terms. Accented letters are kept as they are.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params<F> {
    /// Term-frequency saturation.
    pub k1: F,
    /// Length normalization, in `[0, 1]`.
    pub b: F,
}

impl<F: Scalar> Default for Bm25Params<F> {
    fn default() -> Self {
        Bm25Params { k1: F::lit(1.2), b: F::lit(0.75) }
    }
}

impl<F: Scalar> Bm25Params<F> {
    pub fn new(k1: F, b: F) -> Result<Self> {
        if !k1.is_finite() || k1 < F::zero() {
            return Err(Error::Config(format!("k1 must be finite and non-negative, got {k1}")));
        }
        if !b.is_finite() || b < F::zero() || b > F::one() {
            return Err(Error::Config(format!("b must lie in [0, 1], got {b}")));
        }
        Ok(Bm25Params { k1, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Posting {
    pub passage_id: u64,
    pub term_frequency: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex<F> {
    postings: BTreeMap<String, Vec<Posting>>,
    passage_lengths: BTreeMap<u64, u32>,
    avg_length: F,
    params: Bm25Params<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult<F> {
    pub passage_id: u64,
    pub score: F,
    /// 1-based.
    pub rank: usize,
}

/// Descending score, then ascending passage id.
fn rank_order<F: Scalar>(a: &(u64, F), b: &(u64, F)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

impl<F: Scalar> InvertedIndex<F> {
    /// Indexes `passages`. Passage ids must be unique and at least one
    /// passage must contain a token.
    pub fn build(passages: &[Passage], params: Bm25Params<F>) -> Result<Self> {
        Self::build_from(passages.iter().map(|p| (p.passage_id, p.text.as_str())), params)
    }

    pub fn build_from<'a, I>(passages: I, params: Bm25Params<F>) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, &'a str)>,
    {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut passage_lengths = BTreeMap::new();
        for (id, text) in passages {
            let terms = tokenize(text);
            if passage_lengths.insert(id, terms.len() as u32).is_some() {
                return Err(Error::DuplicatePassage(id));
            }
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in terms {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts {
                postings.entry(term).or_default().push(Posting { passage_id: id, term_frequency: tf });
            }
        }
        for list in postings.values_mut() {
            list.sort_unstable_by_key(|p| p.passage_id);
        }
        Self::from_parts(postings, passage_lengths, params)
    }

    pub(crate) fn from_parts(
        postings: BTreeMap<String, Vec<Posting>>,
        passage_lengths: BTreeMap<u64, u32>,
        params: Bm25Params<F>,
    ) -> Result<Self> {
        let total: u64 = passage_lengths.values().map(|&l| u64::from(l)).sum();
        if passage_lengths.is_empty() || total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let avg_length = F::lit(total as f64) / F::from_count(passage_lengths.len());
        Ok(InvertedIndex { postings, passage_lengths, avg_length, params })
    }

    pub fn passage_count(&self) -> usize {
        self.passage_lengths.len()
    }

    pub fn avg_length(&self) -> F {
        self.avg_length
    }

    pub fn params(&self) -> Bm25Params<F> {
        self.params
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn passage_length(&self, passage_id: u64) -> Option<u32> {
        self.passage_lengths.get(&passage_id).copied()
    }

    pub fn passage_lengths(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.passage_lengths.iter().map(|(&id, &len)| (id, len))
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn idf(&self, term: &str) -> F {
        let n = F::from_count(self.passage_count());
        let df = F::from_count(self.document_frequency(term));
        let half = F::lit(0.5);
        ((n - df + half) / (df + half) + F::one()).ln()
    }

    fn term_weight(&self, idf: F, tf: u32, length: u32) -> F {
        let Bm25Params { k1, b } = self.params;
        let tf = F::from_u32(tf).expect("tf representable");
        let len = F::from_u32(length).expect("length representable");
        let norm = F::one() - b + b * len / self.avg_length;
        idf * tf * (k1 + F::one()) / (tf + k1 * norm)
    }

    /// Distinct query terms in a fixed (sorted) order, so that per-passage
    /// sums are accumulated identically by every scoring path.
    fn distinct_terms<S: AsRef<str>>(query_terms: &[S]) -> BTreeSet<&str> {
        query_terms.iter().map(AsRef::as_ref).collect()
    }

    /// BM25 score of one passage. Repeated query terms count once.
    pub fn score<S: AsRef<str>>(&self, query_terms: &[S], passage_id: u64) -> Result<F> {
        let length = self.passage_length(passage_id).ok_or(Error::UnknownPassage(passage_id))?;
        let mut score = F::zero();
        for term in Self::distinct_terms(query_terms) {
            let list = self.postings(term);
            if let Ok(i) = list.binary_search_by_key(&passage_id, |p| p.passage_id) {
                score = score + self.term_weight(self.idf(term), list[i].term_frequency, length);
            }
        }
        Ok(score)
    }

    /// Scores every passage holding at least one query term.
    pub fn score_candidates<S: AsRef<str>>(&self, query_terms: &[S]) -> Vec<(u64, F)> {
        let mut acc: HashMap<u64, F> = HashMap::new();
        for term in Self::distinct_terms(query_terms) {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(term);
            for p in list {
                let length = self.passage_lengths[&p.passage_id];
                let w = self.term_weight(idf, p.term_frequency, length);
                let slot = acc.entry(p.passage_id).or_insert_with(F::zero);
                *slot = *slot + w;
            }
        }
        acc.into_iter().filter(|(_, s)| *s > F::zero()).collect()
    }

    /// Top `k` passages for `query`, best first; equal scores are ordered by
    /// ascending passage id. Passages sharing no term with the query are
    /// never returned.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<RetrievalResult<F>> {
        let terms = tokenize(query);
        if terms.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut scored = self.score_candidates(&terms);
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, rank_order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(rank_order);
        scored
            .into_iter()
            .enumerate()
            .map(|(i, (passage_id, score))| RetrievalResult { passage_id, score, rank: i + 1 })
            .collect()
    }
}
