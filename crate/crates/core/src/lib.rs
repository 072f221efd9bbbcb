//! Verifier-guided text-to-graph toolkit.
//!
//! Builds verifier-training datasets by graph perturbation, drives
//! verify-correct loops against pluggable LLM/verifier backends, scores
//! generated graphs with four graph-matching metrics, and augments noisy
//! parallel text-graph corpora.

pub mod graph;

pub use graph::{GraphError, LabeledDigraph, NormalizationPolicy, SemanticGraph, Triple};
