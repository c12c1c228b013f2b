//! Retrieval-augmented question answering over Portuguese environmental
//! text.
//!
//! The pipeline has two shapes: a reader that answers from the question
//! alone, and a BM25 retriever that first pulls the top-k passages and packs
//! them with the question into the reader's input. Around it sit the
//! corpus builders (Wikipedia category traversal, news keyword screening,
//! cleaning and 100-word chunking), the QA-pair mining rules, and the
//! F1 / exact-match / Rouge-L evaluator.
//!
//! Scoring code is generic over the float type ([`Scalar`]); the metrics
//! accept any [`Fraction`], including exact rationals. The aliases below fix
//! the common `f64` choice.

pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod jsonl;
pub mod qa;
pub mod reader;
pub mod retriever;
pub mod scalar;

pub use error::{Error, ErrorClass, Result};
pub use scalar::{Fraction, Scalar};

pub type Index = retriever::InvertedIndex<f64>;
pub type IndexF32 = retriever::InvertedIndex<f32>;
pub type Params = retriever::Bm25Params<f64>;
pub type Hit = retriever::RetrievalResult<f64>;
pub type Kb = reader::KnowledgeBase<f64>;
pub type Report = eval::EvalReport<f64>;
/// Exact rational for metric checks.
pub type Exact = num_rational::Ratio<i64>;
