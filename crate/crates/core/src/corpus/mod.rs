//! Knowledge-base construction: category-graph traversal over a Wikipedia
//! dump, keyword screening of pre-fetched news, text cleaning and fixed-size
//! passage chunking.

mod categories;
mod news;
mod text;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use categories::{
    bfs_collect, parse_categorylinks, parse_id_map, read_graph_jsonl, write_graph_jsonl,
    CategoryGraph, CategoryNode, LinkParseReport,
};
pub use news::{filter_news, NewsFilter, NewsFilterReport, DEFAULT_MIN_DATE};
pub use text::{chunk, clean_text, DEFAULT_PASSAGE_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Wiki,
    News,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: u64,
    pub source: Source,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_at: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords_matched: Vec<String>,
}

/// A source record before cleaning and id assignment, as found in the
/// pre-fetched news and article JSONL inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    #[serde(default)]
    pub id: Option<u64>,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub published_at: Option<NaiveDate>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub source: Option<Source>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub passage_id: u64,
    pub doc_id: u64,
    pub index_in_doc: u32,
    pub text: String,
    pub word_count: u32,
}

/// Document and passage store with sequential id allocation.
///
/// Ids are handed out in insertion order starting from the configured bases,
/// so two stores can be given disjoint id ranges and later merged into one
/// knowledge base.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    passages: Vec<Passage>,
    next_doc_id: u64,
    next_passage_id: u64,
    passage_size: usize,
}

impl Corpus {
    pub fn new(passage_size: usize) -> Self {
        Self::with_id_bases(passage_size, 0, 0)
    }

    pub fn with_id_bases(passage_size: usize, doc_base: u64, passage_base: u64) -> Self {
        assert!(passage_size > 0, "passage size must be positive");
        Corpus {
            documents: Vec::new(),
            passages: Vec::new(),
            next_doc_id: doc_base,
            next_passage_id: passage_base,
            passage_size,
        }
    }

    /// Cleans `raw`, assigns it the next document id and chunks it.
    ///
    /// Returns `None` (and stores nothing) when cleaning leaves no text.
    pub fn ingest(&mut self, raw: RawDocument, source: Source) -> Option<&Document> {
        let body = clean_text(&raw.body)?;
        let title = clean_text(&raw.title).unwrap_or_default();
        let doc = Document {
            id: self.next_doc_id,
            source,
            title,
            body,
            published_at: raw.published_at,
            url: raw.url,
            keywords_matched: Vec::new(),
        };
        Some(self.push(doc))
    }

    /// Adds an already-cleaned document, re-assigning its id.
    pub fn push(&mut self, mut doc: Document) -> &Document {
        doc.id = self.next_doc_id;
        self.next_doc_id += 1;
        for mut passage in chunk(&doc, self.passage_size) {
            passage.passage_id = self.next_passage_id;
            self.next_passage_id += 1;
            self.passages.push(passage);
        }
        self.documents.push(doc);
        self.documents.last().expect("just pushed")
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn into_parts(self) -> (Vec<Document>, Vec<Passage>) {
        (self.documents, self.passages)
    }
}
