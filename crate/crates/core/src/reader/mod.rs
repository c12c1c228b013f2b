//! Answer production: query reformulation under a token budget, a
//! deterministic extractive reader, a remote generative reader client, and
//! the two pipeline modes (reader only, retriever + reader).

mod extractive;
mod reformulate;
mod remote;

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Passage;
use crate::error::{Error, Result};
use crate::retriever::InvertedIndex;
use crate::scalar::Scalar;

pub use extractive::{content_terms, extractive_answer, Extraction, DEFAULT_MAX_SPAN, STOPWORDS};
pub use reformulate::{reformulate, ReformulatedQuery, SEPARATOR};
pub use remote::{remote_generate, GenerateRequest, GenerateResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ReaderOnly,
    RetrieverReader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReaderKind {
    Extractive,
    #[serde(alias = "remote")]
    RemoteGenerative,
}

/// Default token budget for a given passage count: 512 up to five passages,
/// 1024 beyond.
pub fn default_budget(k: usize) -> usize {
    if k <= 5 {
        512
    } else {
        1024
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderConfig {
    pub mode: Mode,
    pub reader_kind: ReaderKind,
    pub k: usize,
    pub token_budget: usize,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_timeout", with = "secs")]
    pub timeout: Duration,
    #[serde(default = "default_max_span")]
    pub max_span: usize,
}

fn default_timeout() -> Duration {
    Duration::from_secs(30)
}

fn default_max_span() -> usize {
    DEFAULT_MAX_SPAN
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl ReaderConfig {
    pub fn extractive(mode: Mode, k: usize) -> Self {
        ReaderConfig {
            mode,
            reader_kind: ReaderKind::Extractive,
            k,
            token_budget: default_budget(k),
            endpoint: None,
            timeout: default_timeout(),
            max_span: DEFAULT_MAX_SPAN,
        }
    }

    pub fn validate(&self, has_index: bool) -> Result<()> {
        if self.mode == Mode::RetrieverReader {
            if !has_index {
                return Err(Error::Config("retriever_reader mode needs an index".into()));
            }
            if self.k == 0 {
                return Err(Error::Config("retriever_reader mode needs k >= 1".into()));
            }
        }
        if self.reader_kind == ReaderKind::RemoteGenerative && self.endpoint.is_none() {
            return Err(Error::Config("remote reader needs an endpoint".into()));
        }
        if self.token_budget == 0 {
            return Err(Error::Config("token budget must be positive".into()));
        }
        Ok(())
    }
}

/// An index together with the passage texts it was built from.
#[derive(Debug, Clone)]
pub struct KnowledgeBase<F> {
    pub index: InvertedIndex<F>,
    texts: HashMap<u64, String>,
}

impl<F: Scalar> KnowledgeBase<F> {
    pub fn new(index: InvertedIndex<F>, passages: impl IntoIterator<Item = Passage>) -> Self {
        let texts = passages.into_iter().map(|p| (p.passage_id, p.text)).collect();
        KnowledgeBase { index, texts }
    }

    pub fn text(&self, passage_id: u64) -> Option<&str> {
        self.texts.get(&passage_id).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub answer: String,
    /// Ids of the retrieved passages that made it into the reader input,
    /// in rank order.
    pub passages_used: Vec<u64>,
    pub truncated: bool,
    pub low_confidence: bool,
}

/// Answers `question` with the configured pipeline.
///
/// In reader-only mode the reader sees the bare question. In
/// retriever-reader mode the top `cfg.k` passages are retrieved, packed into
/// the reformulated query, and handed to the reader.
pub fn answer<F: Scalar>(question: &str, cfg: &ReaderConfig, kb: Option<&KnowledgeBase<F>>) -> Result<Answer> {
    cfg.validate(kb.is_some())?;

    let (ids, texts): (Vec<u64>, Vec<&str>) = match (cfg.mode, kb) {
        (Mode::RetrieverReader, Some(kb)) => kb
            .index
            .retrieve(question, cfg.k)
            .into_iter()
            .map(|hit| kb.text(hit.passage_id).map(|t| (hit.passage_id, t)).ok_or(Error::UnknownPassage(hit.passage_id)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip(),
        _ => (Vec::new(), Vec::new()),
    };

    let rq = reformulate(question, &texts, cfg.token_budget)?;
    let passages_used: Vec<u64> = ids
        .iter()
        .zip(&rq.passages)
        .filter(|(_, text)| !text.is_empty())
        .map(|(id, _)| *id)
        .collect();

    let (text, low_confidence) = match cfg.reader_kind {
        ReaderKind::Extractive => {
            let ex = extractive_answer(&rq, cfg.max_span);
            (ex.text, ex.low_confidence)
        }
        ReaderKind::RemoteGenerative => {
            let endpoint = cfg.endpoint.as_deref().expect("validated");
            (remote_generate(endpoint, &rq, cfg.timeout)?.answer, false)
        }
    };

    Ok(Answer { answer: text, passages_used, truncated: rq.truncated, low_confidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retriever::Bm25Params;

    fn kb() -> KnowledgeBase<f64> {
        let passages: Vec<Passage> = [
            "A capital do Pará é Belém.",
            "O Cerrado é a savana mais rica do mundo.",
            "O Pantanal fica em Mato Grosso.",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| Passage {
            passage_id: i as u64 + 10,
            doc_id: i as u64,
            index_in_doc: 0,
            text: t.to_string(),
            word_count: t.split_whitespace().count() as u32,
        })
        .collect();
        let index = InvertedIndex::build(&passages, Bm25Params::default()).unwrap();
        KnowledgeBase::new(index, passages)
    }

    #[test]
    fn reader_only_extractive_has_nothing_to_extract() {
        let cfg = ReaderConfig::extractive(Mode::ReaderOnly, 0);
        let out = answer::<f64>("Qual é a capital do Pará?", &cfg, None).unwrap();
        assert!(out.low_confidence);
        assert!(out.answer.is_empty());
        assert!(out.passages_used.is_empty());
    }

    #[test]
    fn retriever_reader_reports_provenance() {
        let cfg = ReaderConfig::extractive(Mode::RetrieverReader, 2);
        let out = answer("Qual é a capital do Pará?", &cfg, Some(&kb())).unwrap();
        assert_eq!(out.answer, "Belém.");
        assert_eq!(out.passages_used[0], 10);
    }

    #[test]
    fn config_validation() {
        let cfg = ReaderConfig::extractive(Mode::RetrieverReader, 5);
        assert!(matches!(answer::<f64>("q", &cfg, None), Err(Error::Config(_))));
        let mut remote = ReaderConfig::extractive(Mode::ReaderOnly, 0);
        remote.reader_kind = ReaderKind::RemoteGenerative;
        assert!(matches!(answer::<f64>("q", &remote, None), Err(Error::Config(_))));
    }

    #[test]
    fn config_json_accepts_remote_alias() {
        let cfg: ReaderConfig = serde_json::from_str(
            r#"{"mode":"retriever_reader","reader_kind":"remote","k":10,"token_budget":1024,"endpoint":"http://x","timeout":2.5}"#,
        )
        .unwrap();
        assert_eq!(cfg.reader_kind, ReaderKind::RemoteGenerative);
        assert_eq!(cfg.timeout, Duration::from_millis(2500));
        assert_eq!(cfg.max_span, DEFAULT_MAX_SPAN);
    }
}
