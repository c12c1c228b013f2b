//! Keyword screening of pre-fetched news articles.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Document, Source};

/// News published before this date is dropped.
pub const DEFAULT_MIN_DATE: NaiveDate = match NaiveDate::from_ymd_opt(2018, 1, 1) {
    Some(d) => d,
    None => panic!("valid date"),
};

/// Search keywords, each with the words that disqualify a match on it.
///
/// Deserializes from the keywords file layout `{"keyword": ["exclusion", ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NewsFilter {
    pub keywords: BTreeMap<String, Vec<String>>,
}

impl NewsFilter {
    pub fn new<K, E, I>(entries: I) -> Self
    where
        K: Into<String>,
        E: Into<String>,
        I: IntoIterator<Item = (K, Vec<E>)>,
    {
        NewsFilter {
            keywords: entries
                .into_iter()
                .map(|(k, ex)| (k.into(), ex.into_iter().map(Into::into).collect()))
                .collect(),
        }
    }

    /// Keywords matched by `text` (already lowercased), or `None` when one
    /// of the matched keywords has an exclusion word present.
    fn screen(&self, text: &str) -> Option<Vec<String>> {
        let mut matched = Vec::new();
        for (keyword, exclusions) in &self.keywords {
            if !text.contains(&keyword.to_lowercase()) {
                continue;
            }
            if exclusions.iter().any(|ex| text.contains(&ex.to_lowercase())) {
                return None;
            }
            matched.push(keyword.clone());
        }
        Some(matched)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsFilterReport {
    pub scanned: u64,
    pub kept: u64,
    pub dropped_date: u64,
    pub dropped_no_keyword: u64,
    pub dropped_excluded: u64,
    /// Kept documents per keyword.
    pub per_keyword: BTreeMap<String, u64>,
    /// Kept documents per keyword and publication year.
    pub per_keyword_year: BTreeMap<String, BTreeMap<i32, u64>>,
}

/// Keeps news documents published on or after `min_date` that match at
/// least one keyword and none of the matched keywords' exclusion words.
///
/// Matching is a case-insensitive substring test over `title + " " + body`.
/// Kept documents have `keywords_matched` filled in. Documents without a
/// publication date count as too old.
pub fn filter_news<I>(docs: I, filter: &NewsFilter, min_date: NaiveDate) -> (Vec<Document>, NewsFilterReport)
where
    I: IntoIterator<Item = Document>,
{
    let mut report = NewsFilterReport::default();
    let mut kept = Vec::new();
    for mut doc in docs {
        report.scanned += 1;
        let Some(date) = doc.published_at.filter(|d| *d >= min_date) else {
            report.dropped_date += 1;
            continue;
        };
        let text = format!("{} {}", doc.title, doc.body).to_lowercase();
        match filter.screen(&text) {
            None => report.dropped_excluded += 1,
            Some(matched) if matched.is_empty() => report.dropped_no_keyword += 1,
            Some(matched) => {
                for k in &matched {
                    *report.per_keyword.entry(k.clone()).or_default() += 1;
                    *report
                        .per_keyword_year
                        .entry(k.clone())
                        .or_default()
                        .entry(date.year())
                        .or_default() += 1;
                }
                doc.source = Source::News;
                doc.keywords_matched = matched;
                report.kept += 1;
                kept.push(doc);
            }
        }
    }
    (kept, report)
}
