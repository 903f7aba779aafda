//! Academic name disambiguation toolkit.
//!
//! The crate covers the full disambiguation life cycle over bibliographic
//! name blocks:
//!
//! - [`corpus`] loads, validates, and splits the benchmark JSON formats.
//! - [`textnorm`] holds name blocking, tokenization, and string metrics.
//! - [`embed`] trains skip-gram token embeddings and composes paper
//!   embeddings from selected attribute fields.
//! - [`relgraph`] builds weighted heterogeneous paper graphs, runs
//!   meta-path random walks, and constructs ego graphs.
//! - [`snd`] clusters a name block from scratch: fused semantic/relational
//!   distances, density clustering, and rule-based post-matching.
//! - [`rnd`] assigns newly arrived papers to candidate authors (or NIL)
//!   with hand-crafted, kernel-pooled, and ego-graph features.
//! - [`ind`] scores the papers inside one author profile for incorrect
//!   assignment.
//! - [`eval`] implements the pairwise, weighted, and ranking evaluation
//!   protocols.
//! - [`synth`] generates ground-truth-known synthetic blocks for testing.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod ind;
pub mod relgraph;
pub mod rnd;
pub(crate) mod seeding;
pub mod snd;
pub mod synth;
pub mod textnorm;

pub use error::{Error, Result};
