//! Retrieval primitives for localizing the files an issue report touches.
//!
//! Everything in this crate is pure computation over in-memory values and
//! needs only `alloc`. Reading datasets, walking repositories, talking to
//! embedding services and writing reports live in the `patchrecall` crate.
//!
//! The pipeline pieces, bottom-up:
//!
//! * [`textproc`]: identifier-aware tokenization shared by every lexical path.
//! * [`corpus`]: issue/patch/instance records, unified-diff file extraction,
//!   repository snapshots.
//! * [`sparse`]: inverted index with BM25 and TF-IDF retrieval.
//! * [`dense`]: embedding provider trait, deterministic hashing embedder,
//!   exact cosine search, history-based and codebase dense retrieval.
//! * [`fusion`]: per-list min-max normalization and alpha-weighted fusion.
//! * [`eval`]: recall@k, method evaluation, alpha-by-k sweeps, patch-size
//!   statistics and figure-level sanity flags.
#![no_std]

extern crate alloc;

pub mod corpus;
pub mod dense;
pub mod eval;
pub mod fusion;
pub mod ranking;
pub mod sparse;
pub mod textproc;

pub use corpus::{
    normalize_path, parse_patch_files, InstanceExample, IssueRecord, PatchRecord, RepoSnapshot,
    Split,
};
pub use dense::{
    ChunkingConfig, EmbedItem, Embedder, EmbeddingProviderSpec, EmbeddingVector, HashingEmbedder,
    HistoryPool, ProviderKind, VectorIndex,
};
pub use eval::{recall_at_k, SweepGrid};
pub use fusion::{fuse, minmax_normalize, top_k, FusionConfig, HybridCandidate};
pub use ranking::{Method, ScoredDoc, ScoredList};
pub use sparse::{bm25_retrieve, build_index, tfidf_retrieve, Bm25Params, InvertedIndex};
pub use textproc::{tokenize, TokenizerConfig};

/// Errors raised when an argument violates an operation's precondition.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid argument: {0}")]
pub struct ArgumentError(pub alloc::string::String);

impl ArgumentError {
    pub(crate) fn new(msg: impl Into<alloc::string::String>) -> Self {
        ArgumentError(msg.into())
    }
}
