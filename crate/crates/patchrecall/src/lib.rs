//! Dataset ingestion, repository snapshots, embedding providers, index
//! persistence, run configuration, reports and the pipelines behind the
//! `patchrecall` command.

pub mod config;
pub mod dataset;
pub mod embeddings;
pub mod error;
pub mod fixtures;
pub mod index_file;
pub mod pipeline;
pub mod report;
pub mod snapshot;

pub use error::{Error, Result};
