//! Domain QA-pair mining from large open-domain QA dumps: keyword rules,
//! streaming filter, translation and train/validation/test splits.

mod rules;
mod split;
mod translate;

use serde::{Deserialize, Serialize};

pub use rules::{
    filter_dataset, filter_pairs, read_pairs, select_pair, Decision, FilterReport, KeywordRuleSet, Reason,
};
pub use split::{split_dataset, SplitRatios, Splits};
pub use translate::{
    translate_pairs, DictionaryTranslator, HttpTranslator, IdentityTranslator, Rejected, Translated, Translator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Paq,
    Msmarco,
    Fixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Pt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub question: String,
    pub answer: String,
    pub origin: Origin,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl QAPair {
    pub fn new(question: impl Into<String>, answer: impl Into<String>, origin: Origin, language: Language) -> Self {
        QAPair {
            question: question.into(),
            answer: answer.into(),
            origin,
            language,
            split: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.question.trim().is_empty() && !self.answer.trim().is_empty()
    }
}
