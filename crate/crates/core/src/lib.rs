//! Multimodal chemical passage search.
//!
//! Passages, reaction records and diagram structures are loaded from a
//! pre-extracted corpus, mentions are linked to diagrams, and passages are
//! retrieved by text (BM25), structure (Tanimoto or substructure) or both.

pub mod molgraph;
pub mod par;
pub mod fingerprint;
pub mod substruct;
pub mod querylang;
pub mod textindex;
pub mod corpus;
pub mod linker;
pub mod search;
pub mod snapshot;
