#![allow(dead_code)]

pub mod stub;

use std::path::PathBuf;

use ragqa::corpus::{Corpus, RawDocument, Source, DEFAULT_PASSAGE_SIZE};
use ragqa::eval::normalize_answer;
use ragqa::qa::QAPair;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn raw_docs(name: &str) -> Vec<RawDocument> {
    ragqa::jsonl::read_path(&fixture(name)).expect("fixture documents")
}

pub fn corpus_of(docs: impl IntoIterator<Item = RawDocument>) -> Corpus {
    let mut corpus = Corpus::new(DEFAULT_PASSAGE_SIZE);
    for raw in docs {
        let source = raw.source.unwrap_or(Source::Wiki);
        corpus.ingest(raw, source).expect("fixture document has text");
    }
    corpus
}

/// Answer-bearing documents followed by the distractors.
pub fn mini_corpus() -> Corpus {
    corpus_of(raw_docs("mini/answers.jsonl").into_iter().chain(raw_docs("mini/distractors.jsonl")))
}

pub fn mini_qa() -> Vec<QAPair> {
    ragqa::jsonl::read_path(&fixture("mini/qa_test.jsonl")).expect("fixture QA pairs")
}

/// True when the normalized answer occurs as a contiguous token run in the
/// normalized text.
pub fn contains_answer(text: &str, answer: &str) -> bool {
    let hay: Vec<String> = normalize_answer(text).split(' ').map(String::from).collect();
    let needle: Vec<String> = normalize_answer(answer).split(' ').map(String::from).collect();
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle.as_slice())
}
