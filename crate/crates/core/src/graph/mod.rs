//! Data model for triples and semantic graphs: parsing, serialization,
//! normalization, and the labeled-digraph view used by the metrics.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

mod parse;

pub use parse::parse_graph;

/// Errors produced while parsing or normalizing graphs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("triple must have exactly 3 elements, found {0}")]
    ArityViolation(usize),
    #[error("triple field is empty after normalization")]
    EmptyField,
}

/// One (subject, predicate, object) fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn fields(&self) -> [&str; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Canonical single-triple rendering: `[s, p, o]`.
    pub fn serialize(&self) -> String {
        let mut out = String::from("[");
        out.push_str(&escape_field(&self.subject));
        out.push_str(", ");
        out.push_str(&escape_field(&self.predicate));
        out.push_str(", ");
        out.push_str(&escape_field(&self.object));
        out.push(']');
        out
    }

    /// Applies the policy to each field; fails if any field normalizes to
    /// nothing.
    pub fn normalized(&self, policy: &NormalizationPolicy) -> Result<Triple, GraphError> {
        let t = Triple {
            subject: policy.entity(&self.subject),
            predicate: policy.predicate(&self.predicate),
            object: policy.entity(&self.object),
        };
        if t.fields().iter().any(|f| f.trim().is_empty()) {
            return Err(GraphError::EmptyField);
        }
        Ok(t)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&self.subject)?;
        seq.serialize_element(&self.predicate)?;
        seq.serialize_element(&self.object)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Triple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TripleVisitor;
        impl<'de> Visitor<'de> for TripleVisitor {
            type Value = Triple;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a 3-element array of strings")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Triple, A::Error> {
                let subject: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                let predicate: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                let object: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(2, &self))?;
                if seq.next_element::<String>()?.is_some() {
                    return Err(serde::de::Error::invalid_length(4, &self));
                }
                Ok(Triple::new(subject, predicate, object))
            }
        }
        deserializer.deserialize_seq(TripleVisitor)
    }
}

/// String transforms applied before any triple or entity comparison.
///
/// Applying a policy twice is the same as applying it once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub case_fold: bool,
    pub collapse_whitespace: bool,
    pub strip_surrounding_quotes: bool,
    /// Maps underscores and camelCase boundaries in predicates to spaces.
    pub unify_separators: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            case_fold: true,
            collapse_whitespace: true,
            strip_surrounding_quotes: true,
            unify_separators: true,
        }
    }
}

impl NormalizationPolicy {
    /// No transforms at all; comparisons are exact.
    pub fn strict() -> Self {
        NormalizationPolicy {
            case_fold: false,
            collapse_whitespace: false,
            strip_surrounding_quotes: false,
            unify_separators: false,
        }
    }

    /// Normalization for entity surface forms (subjects and objects).
    pub fn entity(&self, s: &str) -> String {
        let mut out = s.to_string();
        if self.strip_surrounding_quotes {
            out = strip_quotes(&out);
        }
        self.finish(out)
    }

    /// Normalization for relation names; also unifies separators.
    pub fn predicate(&self, s: &str) -> String {
        let mut out = s.to_string();
        if self.strip_surrounding_quotes {
            out = strip_quotes(&out);
        }
        if self.unify_separators {
            out = unify_separators(&out);
        }
        self.finish(out)
    }

    /// Normalization for free text (used by substring checks).
    pub fn text(&self, s: &str) -> String {
        self.finish(s.to_string())
    }

    fn finish(&self, mut out: String) -> String {
        if self.case_fold {
            out = out.to_lowercase();
        }
        if self.collapse_whitespace {
            out = out.split_whitespace().collect::<Vec<_>>().join(" ");
        }
        out
    }
}

fn strip_quotes(s: &str) -> String {
    let mut cur = s.trim();
    loop {
        let mut chars = cur.chars();
        match (chars.next(), cur.chars().last()) {
            (Some(first), Some(last))
                if cur.chars().count() >= 2 && first == last && (first == '"' || first == '\'') =>
            {
                cur = &cur[first.len_utf8()..cur.len() - last.len_utf8()];
                cur = cur.trim();
            }
            _ => break,
        }
    }
    if cur.len() == s.len() {
        s.to_string()
    } else {
        cur.to_string()
    }
}

fn unify_separators(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    let mut prev: Option<char> = None;
    for c in s.chars() {
        if c == '_' {
            out.push(' ');
            prev = Some(' ');
            continue;
        }
        if let Some(p) = prev {
            if (p.is_lowercase() || p.is_numeric()) && c.is_uppercase() {
                out.push(' ');
            }
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

/// Normalizes one triple under a policy (free-function form of
/// [`Triple::normalized`]).
pub fn normalize(t: &Triple, policy: &NormalizationPolicy) -> Result<Triple, GraphError> {
    t.normalized(policy)
}

/// Dedupe key: normalized fields, with empty results kept as-is so keying
/// never fails.
fn norm_key(t: &Triple, policy: &NormalizationPolicy) -> (String, String, String) {
    (
        policy.entity(&t.subject),
        policy.predicate(&t.predicate),
        policy.entity(&t.object),
    )
}

/// Ordered, duplicate-free collection of triples.
///
/// Duplicates are judged under the [`NormalizationPolicy`] passed to each
/// mutating call; insertion order is preserved, so serialization is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SemanticGraph {
    triples: Vec<Triple>,
}

impl SemanticGraph {
    pub fn new() -> Self {
        SemanticGraph::default()
    }

    pub fn from_triples<I>(triples: I, policy: &NormalizationPolicy) -> Self
    where
        I: IntoIterator<Item = Triple>,
    {
        let mut g = SemanticGraph::new();
        for t in triples {
            g.insert(t, policy);
        }
        g
    }

    /// Inserts a triple unless an equivalent one (under `policy`) is already
    /// present. Returns whether the triple was added.
    pub fn insert(&mut self, t: Triple, policy: &NormalizationPolicy) -> bool {
        if self.contains(&t, policy) {
            return false;
        }
        self.triples.push(t);
        true
    }

    pub fn contains(&self, t: &Triple, policy: &NormalizationPolicy) -> bool {
        let key = norm_key(t, policy);
        self.triples.iter().any(|x| norm_key(x, policy) == key)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Canonical linearized form: `[[s1, p1, o1], [s2, p2, o2], ...]`.
    pub fn serialize(&self) -> String {
        let inner: Vec<String> = self.triples.iter().map(|t| t.serialize()).collect();
        format!("[{}]", inner.join(", "))
    }

    /// Graph extended with each missing triple not already present under
    /// `policy`; original triples first, appended triples in given order.
    pub fn merge_missing(&self, missing: &[Triple], policy: &NormalizationPolicy) -> SemanticGraph {
        let mut merged = self.clone();
        for t in missing {
            merged.insert(t.clone(), policy);
        }
        merged
    }

    /// Directed-graph view with normalized entity nodes and labeled edges.
    pub fn to_digraph(&self, policy: &NormalizationPolicy) -> LabeledDigraph {
        let mut nodes = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for t in &self.triples {
            let source = policy.entity(&t.subject);
            let target = policy.entity(&t.object);
            let label = policy.predicate(&t.predicate);
            nodes.insert(source.clone());
            nodes.insert(target.clone());
            edges.insert(LabeledEdge {
                source,
                target,
                label,
            });
        }
        LabeledDigraph { nodes, edges }
    }
}

impl fmt::Display for SemanticGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl<'a> IntoIterator for &'a SemanticGraph {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl Serialize for SemanticGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.triples.serialize(serializer)
    }
}

/// Canonical text form of a graph (free-function form of
/// [`SemanticGraph::serialize`]).
pub fn serialize_graph(g: &SemanticGraph) -> String {
    g.serialize()
}

/// Extends `g` with missing triples (free-function form of
/// [`SemanticGraph::merge_missing`]).
pub fn merge_missing(
    g: &SemanticGraph,
    missing: &[Triple],
    policy: &NormalizationPolicy,
) -> SemanticGraph {
    g.merge_missing(missing, policy)
}

/// Builds the digraph view (free-function form of
/// [`SemanticGraph::to_digraph`]).
pub fn to_digraph(g: &SemanticGraph, policy: &NormalizationPolicy) -> LabeledDigraph {
    g.to_digraph(policy)
}

/// Fraction of the graph's distinct normalized entities that occur as
/// substrings of the normalized text. An empty graph scores 1.0.
pub fn surface_overlap(text: &str, g: &SemanticGraph, policy: &NormalizationPolicy) -> f64 {
    let mut entities = BTreeSet::new();
    for t in g.iter() {
        entities.insert(policy.entity(&t.subject));
        entities.insert(policy.entity(&t.object));
    }
    if entities.is_empty() {
        return 1.0;
    }
    let text = policy.text(text);
    let found = entities.iter().filter(|e| text.contains(e.as_str())).count();
    found as f64 / entities.len() as f64
}

/// One directed labeled edge in a [`LabeledDigraph`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledEdge {
    pub source: String,
    pub target: String,
    pub label: String,
}

/// Directed graph over normalized entity strings; node identity is the
/// string itself, so equality is plain set equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledDigraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<LabeledEdge>,
}

impl LabeledDigraph {
    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<LabeledEdge> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Quotes or passes through one field for the canonical text format.
///
/// Fields that carry structural delimiters, backslashes, leading/trailing
/// whitespace, or a leading quote are wrapped in double quotes with `\`
/// escapes so that parsing is unambiguous.
fn escape_field(f: &str) -> String {
    let needs_quoting = f.trim() != f
        || f.starts_with('"')
        || f.starts_with('\'')
        || f.contains(['[', ']', ',', '\\']);
    if !needs_quoting {
        return f.to_string();
    }
    let mut out = String::with_capacity(f.len() + 2);
    out.push('"');
    for c in f.chars() {
        if c == '\\' || c == '"' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
