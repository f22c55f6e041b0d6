//! Deferred visual ingestion (DVI) retrieval engine.
//!
//! Index construction uses only document structure: drawing numbers are
//! clustered into a hierarchy ([`hdnc`]), TOC categories are expanded to page
//! ranges, and page text is fused only when its quality allows ([`indexer`]).
//! Pages are located with BM25 ([`retrieval`]) and visual understanding is
//! deferred to query time, where the located pages are handed to a pluggable
//! vision-language model ([`pipeline`]). [`eval`] computes the retrieval and
//! answering metrics used to compare against a per-page pre-ingestion baseline.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod hdnc;
pub mod indexer;
pub mod pipeline;
pub mod retrieval;
pub mod text;

pub use error::{Error, Result};
