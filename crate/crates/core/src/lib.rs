//! Fielded entity retrieval with a two-stage pipeline.
//!
//! A Fielded Sequential Dependence Model ([`fsdm`]) scores entities stored as
//! six-field documents ([`corpus`], [`index`]) and produces a candidate pool.
//! The pool is then re-ranked by a linear model ([`ltr`]) over per-field
//! cosine similarities in word and entity embedding space ([`semantics`],
//! [`embedding`]) plus the min-max normalized FSDM score. Weights are learned
//! by coordinate ascent on mean NDCG@10 ([`eval`]).
//!
//! The embedding, feature and learning-to-rank code is generic over the
//! floating point type through [`Scalar`]; the aliases below fix it to `f64`
//! (and `f32` where that is useful for large vector tables).

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod fsdm;
pub mod index;
pub mod linker;
pub mod ltr;
pub mod scalar;
pub mod semantics;

pub use corpus::{tokenize, Corpus, Field, FieldContent, FieldedDocument, Qrels, Query};
pub use error::{Error, Result};
pub use eval::RankedList;
pub use fsdm::{FsdmParams, ScoredPool};
pub use index::FieldedIndex;
pub use linker::SurfaceFormDictionary;
pub use scalar::Scalar;

/// Token → vector table in double precision.
pub type EmbeddingTable = embedding::Embeddings<f64>;
/// Token → vector table in single precision.
pub type EmbeddingTableF32 = embedding::Embeddings<f32>;
/// The 13 re-ranking features of one (query, document) pair.
pub type FeatureVector = semantics::Features<f64>;
/// Weights of the linear re-ranker.
pub type LinearModel = ltr::Weights<f64>;
/// Skip-gram hyper-parameters for double-precision training.
pub type SkipgramConfig = embedding::skipgram::SkipgramConfig;
