use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Language, Origin, QAPair};
use crate::error::{Error, Result};

/// The four expression sets of the QA-pair selection rule.
///
/// * `must_have` (M): anchors such as `brazil` or state names
/// * `good_to_have` (G): topical terms that only count alongside an anchor
/// * `unique` (U): expressions that select a pair on their own
/// * `exclude` (E): disqualifiers for anchor-based selection
///
/// Serialized as `{"M": [...], "G": [...], "U": [...], "E": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRuleSet {
    #[serde(rename = "M")]
    pub must_have: Vec<String>,
    #[serde(rename = "G")]
    pub good_to_have: Vec<String>,
    #[serde(rename = "U")]
    pub unique: Vec<String>,
    #[serde(rename = "E")]
    pub exclude: Vec<String>,
}

impl KeywordRuleSet {
    /// Lowercases every expression and checks that no set is empty.
    pub fn new<S: AsRef<str>>(must_have: &[S], good_to_have: &[S], unique: &[S], exclude: &[S]) -> Result<Self> {
        let lower = |xs: &[S]| xs.iter().map(|s| s.as_ref().to_lowercase()).collect();
        KeywordRuleSet {
            must_have: lower(must_have),
            good_to_have: lower(good_to_have),
            unique: lower(unique),
            exclude: lower(exclude),
        }
        .validated()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: KeywordRuleSet = serde_json::from_str(text)?;
        Self::new(&raw.must_have, &raw.good_to_have, &raw.unique, &raw.exclude)
    }

    fn validated(self) -> Result<Self> {
        for (name, set) in [
            ("M", &self.must_have),
            ("G", &self.good_to_have),
            ("U", &self.unique),
            ("E", &self.exclude),
        ] {
            if set.is_empty() {
                return Err(Error::InvalidRules(format!("set {name} is empty")));
            }
            if set.iter().any(|e| e.trim().is_empty()) {
                return Err(Error::InvalidRules(format!("set {name} contains an empty expression")));
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    SelectedByU,
    SelectedByM,
    SelectedByGWithM,
    RejectedNoAnchor,
    RejectedExcluded,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::SelectedByU,
        Reason::SelectedByM,
        Reason::SelectedByGWithM,
        Reason::RejectedNoAnchor,
        Reason::RejectedExcluded,
    ];

    pub fn is_selected(self) -> bool {
        matches!(self, Reason::SelectedByU | Reason::SelectedByM | Reason::SelectedByGWithM)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub reason: Reason,
}

impl Decision {
    pub fn selected(&self) -> bool {
        self.reason.is_selected()
    }
}

fn any_in(text: &str, set: &[String]) -> bool {
    set.iter().any(|e| text.contains(e.as_str()))
}

/// Applies the selection rule to one pair.
///
/// Precedence: a U expression selects unconditionally; otherwise an M anchor
/// is required, any E expression rejects, and a G term alongside the anchor
/// is reported as such. Matching is substring over the lowercased
/// `question + " " + answer`.
pub fn select_pair(pair: &QAPair, rules: &KeywordRuleSet) -> Decision {
    let text = format!("{} {}", pair.question, pair.answer).to_lowercase();
    let reason = if any_in(&text, &rules.unique) {
        Reason::SelectedByU
    } else if !any_in(&text, &rules.must_have) {
        Reason::RejectedNoAnchor
    } else if any_in(&text, &rules.exclude) {
        Reason::RejectedExcluded
    } else if any_in(&text, &rules.good_to_have) {
        Reason::SelectedByGWithM
    } else {
        Reason::SelectedByM
    };
    Decision { reason }
}

/// Selection statistics. Counts merge by addition, so shards can be
/// filtered independently and their reports combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub scanned: u64,
    pub selected: u64,
    pub rate: f64,
    pub reason_histogram: BTreeMap<Reason, u64>,
    /// Lines that could not be read as a pair; not part of `scanned`.
    pub malformed: u64,
}

impl Default for FilterReport {
    fn default() -> Self {
        FilterReport {
            scanned: 0,
            selected: 0,
            rate: 0.0,
            reason_histogram: Reason::ALL.iter().map(|r| (*r, 0)).collect(),
            malformed: 0,
        }
    }
}

impl FilterReport {
    pub fn record(&mut self, reason: Reason) {
        self.scanned += 1;
        if reason.is_selected() {
            self.selected += 1;
        }
        *self.reason_histogram.entry(reason).or_default() += 1;
        self.refresh_rate();
    }

    pub fn merge(&mut self, other: &FilterReport) {
        self.scanned += other.scanned;
        self.selected += other.selected;
        self.malformed += other.malformed;
        for (reason, count) in &other.reason_histogram {
            *self.reason_histogram.entry(*reason).or_default() += count;
        }
        self.refresh_rate();
    }

    fn refresh_rate(&mut self) {
        self.rate = if self.scanned == 0 {
            0.0
        } else {
            self.selected as f64 / self.scanned as f64
        };
    }
}

/// Parses one input line as a pair. JSONL lines are objects with at least
/// `question` and `answer`; TSV lines are `question<TAB>answer`.
fn parse_line(line: &str, jsonl: bool, origin: Origin) -> Option<QAPair> {
    #[derive(Deserialize)]
    struct Loose {
        question: String,
        #[serde(alias = "answers")]
        answer: AnswerField,
        origin: Option<Origin>,
        language: Option<Language>,
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum AnswerField {
        One(String),
        Many(Vec<String>),
    }

    let pair = if jsonl {
        let loose: Loose = serde_json::from_str(line).ok()?;
        let answer = match loose.answer {
            AnswerField::One(a) => a,
            AnswerField::Many(a) => a.into_iter().next()?,
        };
        QAPair::new(
            loose.question,
            answer,
            loose.origin.unwrap_or(origin),
            loose.language.unwrap_or(Language::En),
        )
    } else {
        let mut cols = line.split('\t');
        let (q, a) = (cols.next()?, cols.next()?);
        QAPair::new(q.trim(), a.trim(), origin, Language::En)
    };
    pair.is_valid().then_some(pair)
}

/// Streams pairs from TSV or JSONL input, format detected from the first
/// non-blank line. Malformed lines are yielded as `Err(line_number)`.
pub fn read_pairs<R: BufRead>(reader: R, origin: Origin) -> impl Iterator<Item = Result<std::result::Result<QAPair, usize>>> {
    let mut jsonl: Option<bool> = None;
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return None;
        }
        let is_json = *jsonl.get_or_insert_with(|| trimmed.starts_with('{'));
        Some(Ok(parse_line(trimmed, is_json, origin).ok_or(i + 1)))
    })
}

/// Filters a pair stream line by line, writing selected pairs as JSONL to
/// `out` in input order. Memory use does not grow with input size.
pub fn filter_dataset<R: BufRead, W: Write>(
    input: R,
    origin: Origin,
    rules: &KeywordRuleSet,
    mut out: W,
) -> Result<FilterReport> {
    let mut report = FilterReport::default();
    for item in read_pairs(input, origin) {
        match item? {
            Ok(pair) => {
                let decision = select_pair(&pair, rules);
                report.record(decision.reason);
                if decision.selected() {
                    serde_json::to_writer(&mut out, &pair)?;
                    out.write_all(b"\n")?;
                }
            }
            Err(lineno) => {
                log::debug!("skipping malformed QA line {lineno}");
                report.malformed += 1;
            }
        }
    }
    out.flush()?;
    if report.malformed > 0 {
        log::warn!("skipped {} malformed QA lines", report.malformed);
    }
    Ok(report)
}

/// In-memory counterpart of [`filter_dataset`].
pub fn filter_pairs<I>(pairs: I, rules: &KeywordRuleSet) -> (Vec<QAPair>, FilterReport)
where
    I: IntoIterator<Item = QAPair>,
{
    let mut report = FilterReport::default();
    let selected = pairs
        .into_iter()
        .filter(|pair| {
            let d = select_pair(pair, rules);
            report.record(d.reason);
            d.selected()
        })
        .collect();
    (selected, report)
}
