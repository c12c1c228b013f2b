use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Language, QAPair};
use crate::error::{Error, Result};

/// A text translation backend.
pub trait Translator {
    /// Language the output is in, or `None` when the provider leaves text
    /// in its original language.
    fn target(&self) -> Option<Language>;

    fn translate(&self, text: &str) -> Result<String>;
}

/// Returns text unchanged and leaves the language tag alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn target(&self) -> Option<Language> {
        None
    }

    fn translate(&self, text: &str) -> Result<String> {
        Ok(text.to_string())
    }
}

/// Word-by-word lookup; unknown words pass through unchanged.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DictionaryTranslator {
    pub target: Option<Language>,
    pub words: HashMap<String, String>,
}

impl DictionaryTranslator {
    pub fn new<I, K, V>(target: Language, words: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        DictionaryTranslator {
            target: Some(target),
            words: words.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

impl Translator for DictionaryTranslator {
    fn target(&self) -> Option<Language> {
        self.target
    }

    fn translate(&self, text: &str) -> Result<String> {
        Ok(text
            .split(' ')
            .map(|w| self.words.get(w).map(String::as_str).unwrap_or(w))
            .collect::<Vec<_>>()
            .join(" "))
    }
}

/// Client for a translation service: `POST {endpoint}` with
/// `{"text", "source", "target"}`, answered by `{"translation"}`.
#[derive(Debug, Clone)]
pub struct HttpTranslator {
    endpoint: String,
    source: Language,
    target: Language,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    source: Language,
    target: Language,
}

#[derive(Deserialize)]
struct TranslateResponse {
    translation: String,
}

impl HttpTranslator {
    pub fn new(endpoint: impl Into<String>, source: Language, target: Language, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Translation(e.to_string()))?;
        Ok(HttpTranslator { endpoint: endpoint.into(), source, target, client })
    }
}

impl Translator for HttpTranslator {
    fn target(&self) -> Option<Language> {
        Some(self.target)
    }

    fn translate(&self, text: &str) -> Result<String> {
        let request = TranslateRequest { text, source: self.source, target: self.target };
        let response = self
            .client
            .post(&self.endpoint)
            .json(&request)
            .send()
            .map_err(|e| Error::Translation(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Translation(format!("service answered {status}")));
        }
        let body: TranslateResponse =
            response.json().map_err(|e| Error::Translation(format!("bad service reply: {e}")))?;
        Ok(body.translation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejected {
    pub pair: QAPair,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Translated {
    pub pairs: Vec<QAPair>,
    pub rejected: Vec<Rejected>,
}

impl Translated {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }
}

fn with_retries(provider: &dyn Translator, text: &str, retries: u32) -> Result<String> {
    let mut last = None;
    for attempt in 0..=retries {
        match provider.translate(text) {
            Ok(t) => return Ok(t),
            Err(e) => {
                log::debug!("translation attempt {} failed: {e}", attempt + 1);
                last = Some(e);
            }
        }
    }
    Err(last.unwrap_or_else(|| Error::Translation("no attempts made".into())))
}

/// Translates question and answer of every pair. A pair whose translation
/// still fails after `retries` extra attempts is moved to `rejected` and the
/// run continues.
pub fn translate_pairs<I>(pairs: I, provider: &dyn Translator, retries: u32) -> Translated
where
    I: IntoIterator<Item = QAPair>,
{
    let mut out = Translated::default();
    for pair in pairs {
        let result = with_retries(provider, &pair.question, retries)
            .and_then(|q| with_retries(provider, &pair.answer, retries).map(|a| (q, a)));
        match result {
            Ok((question, answer)) => out.pairs.push(QAPair {
                question,
                answer,
                language: provider.target().unwrap_or(pair.language),
                ..pair
            }),
            Err(e) => out.rejected.push(Rejected { pair, error: e.to_string() }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::Origin;
    use std::cell::Cell;

    fn pairs() -> Vec<QAPair> {
        vec![
            QAPair::new("largest river", "amazon", Origin::Paq, Language::En),
            QAPair::new("what is ibama", "an agency", Origin::Paq, Language::En),
        ]
    }

    #[test]
    fn identity_is_a_no_op() {
        let out = translate_pairs(pairs(), &IdentityTranslator, 0);
        assert_eq!(out.pairs, pairs());
        assert!(out.is_clean());
    }

    #[test]
    fn dictionary_lookup() {
        let dict = DictionaryTranslator::new(Language::Pt, [("river", "rio")]);
        let out = translate_pairs(pairs(), &dict, 0);
        assert_eq!(out.pairs[0].question, "largest rio");
        assert_eq!(out.pairs[0].language, Language::Pt);
        assert_eq!(out.pairs[1].question, "what is ibama");
    }

    struct Failing;
    impl Translator for Failing {
        fn target(&self) -> Option<Language> {
            Some(Language::Pt)
        }
        fn translate(&self, _: &str) -> Result<String> {
            Err(Error::Translation("quota exceeded".into()))
        }
    }

    #[test]
    fn always_failing_provider_rejects_everything() {
        let out = translate_pairs(pairs(), &Failing, 2);
        assert!(out.pairs.is_empty());
        assert_eq!(out.rejected.len(), 2);
        assert!(out.rejected[0].error.contains("quota exceeded"));
        assert_eq!(out.rejected[0].pair, pairs()[0]);
    }

    struct Flaky {
        calls: Cell<u32>,
    }
    impl Translator for Flaky {
        fn target(&self) -> Option<Language> {
            Some(Language::Pt)
        }
        fn translate(&self, text: &str) -> Result<String> {
            self.calls.set(self.calls.get() + 1);
            if self.calls.get() % 2 == 1 {
                Err(Error::Translation("transient".into()))
            } else {
                Ok(text.to_uppercase())
            }
        }
    }

    #[test]
    fn transient_failures_are_retried() {
        let flaky = Flaky { calls: Cell::new(0) };
        let out = translate_pairs(pairs(), &flaky, 1);
        assert!(out.is_clean());
        assert_eq!(out.pairs[0].answer, "AMAZON");
        assert_eq!(flaky.calls.get(), 8);
    }
}
