//! Scoring predicted answers (F1, exact match, Rouge-L), evaluating a QA
//! system over a test split, and running experiment grids.

mod grid;
mod metrics;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qa::{QAPair, Split};
use crate::reader::ReaderKind;
use crate::scalar::Scalar;

pub use grid::{canonical_grid, run_experiment_grid, GridOutcome, GridReader, GridRow, SkipRecord};
pub use metrics::{exact_match, f1, f1_tokens, lcs_len, normalize_answer, rouge_l, rouge_l_tokens, ARTICLES};

/// Which passage collection backs the retriever.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KbKind {
    None,
    Wiki,
    News,
    WikiNews,
}

impl fmt::Display for KbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KbKind::None => "None",
            KbKind::Wiki => "Wiki",
            KbKind::News => "News",
            KbKind::WikiNews => "Wiki + News",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kb: KbKind,
    pub k: usize,
    pub budget: usize,
    pub reader_kind: ReaderKind,
    #[serde(default)]
    pub seed: u64,
    /// Whether the reader was fine-tuned on the domain QA pairs. Only used to
    /// label result rows; the reader itself is chosen by `reader_kind`.
    #[serde(default)]
    pub fine_tuned: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.kb, self.k) {
            (KbKind::None, 0) => {}
            (KbKind::None, k) => return Err(Error::Config(format!("kb none requires k = 0, got {k}"))),
            (kb, 0) => return Err(Error::Config(format!("kb {kb} requires k >= 1"))),
            _ => {}
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(())
    }

    /// The "Model" column label.
    pub fn model_label(&self) -> String {
        let reader = if self.fine_tuned { "Reader w/ FT" } else { "Reader w/o FT" };
        if self.kb == KbKind::None {
            reader.to_string()
        } else {
            format!("Retriever + {reader}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore<F> {
    pub question: String,
    pub gold: String,
    pub predicted: String,
    pub f1: F,
    pub em: F,
    pub rouge_l: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates<F> {
    pub f1: F,
    pub em: F,
    pub rouge_l: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub question: String,
    pub error: String,
}

/// Per-question scores in `[0, 1]` and their means on a 0 to 100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<F> {
    pub per_question: Vec<QuestionScore<F>>,
    pub aggregates: Aggregates<F>,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub failures: Vec<Failure>,
}

impl<F: Scalar> EvalReport<F> {
    fn aggregate(rows: &[QuestionScore<F>]) -> Aggregates<F> {
        if rows.is_empty() {
            let z = F::zero();
            return Aggregates { f1: z, em: z, rouge_l: z };
        }
        let n = F::from_count(rows.len());
        let hundred = F::lit(100.0);
        let mean = |pick: fn(&QuestionScore<F>) -> F| rows.iter().map(pick).sum::<F>() / n * hundred;
        Aggregates { f1: mean(|r| r.f1), em: mean(|r| r.em), rouge_l: mean(|r| r.rouge_l) }
    }

    /// Recomputes the aggregates from the rows and compares within `tol`.
    pub fn is_consistent(&self, tol: F) -> bool {
        let again = Self::aggregate(&self.per_question);
        [(again.f1, self.aggregates.f1), (again.em, self.aggregates.em), (again.rouge_l, self.aggregates.rouge_l)]
            .iter()
            .all(|(a, b)| (*a - *b).abs() <= tol)
    }
}

pub fn score<F: Scalar>(question: &str, gold: &str, predicted: &str) -> QuestionScore<F> {
    QuestionScore {
        question: question.to_string(),
        gold: gold.to_string(),
        predicted: predicted.to_string(),
        f1: f1(predicted, gold),
        em: exact_match(predicted, gold),
        rouge_l: rouge_l(predicted, gold),
    }
}

/// Runs `system` once per test question and scores the predictions.
///
/// A question on which the system fails is scored as an empty prediction
/// and listed in `failures`.
pub fn evaluate<F, S, E>(test_pairs: &[QAPair], mut system: S, cfg: &ExperimentConfig) -> Result<EvalReport<F>>
where
    F: Scalar,
    S: FnMut(&str) -> std::result::Result<String, E>,
    E: fmt::Display,
{
    if let Some(i) = test_pairs.iter().position(|p| p.split != Some(Split::Test)) {
        return Err(Error::Config(format!("pair {i} is not labelled as a test pair")));
    }
    let mut failures = Vec::new();
    let per_question: Vec<QuestionScore<F>> = test_pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let predicted = system(&pair.question).unwrap_or_else(|e| {
                failures.push(Failure { index: i, question: pair.question.clone(), error: e.to_string() });
                String::new()
            });
            score(&pair.question, &pair.answer, &predicted)
        })
        .collect();
    Ok(EvalReport {
        aggregates: EvalReport::aggregate(&per_question),
        per_question,
        config: cfg.clone(),
        failures,
    })
}
