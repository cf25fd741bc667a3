//! Authorship attribution from word co-occurrence networks.
//!
//! Each document becomes a directed word-adjacency network. Words are ranked
//! per document by four node-local metrics, documents are compared by the
//! overlap of their top-ranked words, and the resulting distance matrices are
//! reduced with metric MDS and fed to standard classifiers. A TF-IDF cosine
//! baseline runs through the same reduction and classification path.

pub mod baseline;
pub mod classify;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod similarity;

pub use error::{Error, ErrorKind, Result};
