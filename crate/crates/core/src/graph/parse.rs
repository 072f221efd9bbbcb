//! Recovery-oriented parser for linearized graphs.
//!
//! LLM outputs wrap the bracketed list in arbitrary prose, vary between
//! single/double/no quoting, and sometimes truncate mid-list. The parser
//! scans for balanced bracket regions and accepts the first one that reads
//! as a graph: either an outer list of 3-element lists or a bare triple.
//! Inside a list-of-lists, an inner list with the wrong element count is a
//! hard error; that is how sub-property quadruplets get rejected.

use super::{GraphError, NormalizationPolicy, SemanticGraph, Triple};

/// Parses a linearized graph out of `raw`, deduplicating under `policy`.
pub fn parse_graph(raw: &str, policy: &NormalizationPolicy) -> Result<SemanticGraph, GraphError> {
    if raw.trim().is_empty() {
        return Err(GraphError::MalformedGraph("empty input".into()));
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut first_soft: Option<GraphError> = None;
    let mut saw_region = false;

    for start in bracket_positions(&chars) {
        let Some(end) = extract_region(&chars, start) else {
            continue;
        };
        saw_region = true;
        match parse_region(&chars[start..=end]).and_then(classify) {
            Ok(triples) => return Ok(SemanticGraph::from_triples(triples, policy)),
            Err(c) if c.hard => return Err(c.error),
            Err(c) => {
                first_soft.get_or_insert(c.error);
            }
        }
    }

    if !saw_region {
        if chars.contains(&'[') || chars.contains(&']') {
            return Err(GraphError::MalformedGraph("unbalanced brackets".into()));
        }
        return Err(GraphError::MalformedGraph(
            "no bracketed list found".into(),
        ));
    }
    Err(first_soft
        .unwrap_or_else(|| GraphError::MalformedGraph("no parsable graph found".into())))
}

/// Collects every triple found across all parsable bracket regions of `raw`,
/// in order of appearance. Regions that do not parse are skipped. Used for
/// verifier outputs, which may list several separate `[s, p, o]` groups.
pub(crate) fn parse_triple_regions(raw: &str, policy: &NormalizationPolicy) -> Vec<Triple> {
    let chars: Vec<char> = raw.chars().collect();
    let mut found = SemanticGraph::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '[' {
            i += 1;
            continue;
        }
        match extract_region(&chars, i) {
            Some(end) => match parse_region(&chars[i..=end]).and_then(classify) {
                Ok(triples) => {
                    for t in triples {
                        found.insert(t, policy);
                    }
                    i = end + 1;
                }
                Err(_) => i += 1,
            },
            None => i += 1,
        }
    }
    found.triples().to_vec()
}

fn bracket_positions(chars: &[char]) -> impl Iterator<Item = usize> + '_ {
    chars
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == '[')
        .map(|(i, _)| i)
}

/// Finds the index of the `]` matching the `[` at `start`, or None when the
/// region never closes. Brackets and commas inside quoted items are content;
/// a quote only opens a string when it appears where an item can start.
fn extract_region(chars: &[char], start: usize) -> Option<usize> {
    debug_assert_eq!(chars[start], '[');
    let mut depth = 0usize;
    let mut in_quote: Option<char> = None;
    let mut escaped = false;
    let mut item_start = false;

    for (i, &c) in chars.iter().enumerate().skip(start) {
        if escaped {
            escaped = false;
            continue;
        }
        if let Some(q) = in_quote {
            if c == '\\' {
                escaped = true;
            } else if c == q {
                in_quote = None;
                item_start = false;
            }
            continue;
        }
        match c {
            '\\' => {
                escaped = true;
                item_start = false;
            }
            '[' => {
                depth += 1;
                item_start = true;
            }
            ']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i);
                }
                item_start = false;
            }
            ',' => item_start = true,
            '"' | '\'' if item_start => in_quote = Some(c),
            c if c.is_whitespace() => {}
            _ => item_start = false,
        }
    }
    None
}

enum Item {
    Scalar(String),
    List(Vec<Item>),
}

struct ClassifyError {
    error: GraphError,
    /// Hard errors abort the scan (the region was structurally a graph but
    /// semantically invalid); soft errors let the scan try later regions.
    hard: bool,
}

impl ClassifyError {
    fn soft(error: GraphError) -> Self {
        ClassifyError { error, hard: false }
    }
    fn hard(error: GraphError) -> Self {
        ClassifyError { error, hard: true }
    }
}

/// Parses one balanced `[...]` region into items.
fn parse_region(chars: &[char]) -> Result<Vec<Item>, ClassifyError> {
    debug_assert!(chars.first() == Some(&'[') && chars.last() == Some(&']'));
    let interior = &chars[1..chars.len() - 1];
    if interior.iter().all(|c| c.is_whitespace()) {
        return Ok(Vec::new());
    }
    let mut spans = split_spans(interior);
    // Tolerate a trailing comma.
    if spans.len() > 1 && spans.last().map_or(false, |s| s.trim().is_empty()) {
        spans.pop();
    }
    spans.into_iter().map(|s| interpret_item(&s)).collect()
}

/// Splits the interior of a list at top-level commas.
fn split_spans(chars: &[char]) -> Vec<String> {
    let mut spans = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    let mut in_quote: Option<char> = None;
    let mut escaped = false;
    let mut item_start = true;

    for &c in chars {
        if escaped {
            cur.push(c);
            escaped = false;
            continue;
        }
        if let Some(q) = in_quote {
            if c == '\\' {
                escaped = true;
            } else if c == q {
                in_quote = None;
                item_start = false;
            }
            cur.push(c);
            continue;
        }
        match c {
            '\\' => {
                escaped = true;
                item_start = false;
                cur.push(c);
            }
            '[' => {
                depth += 1;
                item_start = true;
                cur.push(c);
            }
            ']' => {
                depth = depth.saturating_sub(1);
                item_start = false;
                cur.push(c);
            }
            ',' if depth == 0 => {
                spans.push(std::mem::take(&mut cur));
                item_start = true;
            }
            ',' => {
                item_start = true;
                cur.push(c);
            }
            '"' | '\'' if item_start => {
                in_quote = Some(c);
                cur.push(c);
            }
            c if c.is_whitespace() => cur.push(c),
            _ => {
                item_start = false;
                cur.push(c);
            }
        }
    }
    spans.push(cur);
    spans
}

fn interpret_item(span: &str) -> Result<Item, ClassifyError> {
    let s = span.trim();
    if s.starts_with('[') {
        if !s.ends_with(']') {
            return Err(ClassifyError::hard(GraphError::MalformedGraph(
                "content after nested list".into(),
            )));
        }
        let chars: Vec<char> = s.chars().collect();
        return Ok(Item::List(parse_region(&chars)?));
    }
    Ok(Item::Scalar(unquote_scalar(s)))
}

/// Strips one layer of matching quotes when the whole span is cleanly
/// quoted; otherwise keeps the span and only resolves backslash escapes.
fn unquote_scalar(s: &str) -> String {
    let mut it = s.chars();
    if let (Some(first), Some(last)) = (it.next(), s.chars().last()) {
        if (first == '"' || first == '\'') && first == last && s.chars().count() >= 2 {
            let interior = &s[1..s.len() - 1];
            if !has_unescaped(interior, first) {
                return unescape(interior);
            }
        }
    }
    unescape(s)
}

fn has_unescaped(s: &str, q: char) -> bool {
    let mut escaped = false;
    for c in s.chars() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == q {
            return true;
        }
    }
    false
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut escaped = false;
    for c in s.chars() {
        if escaped {
            if matches!(c, '\\' | '"' | '\'' | '[' | ']' | ',') {
                out.push(c);
            } else {
                out.push('\\');
                out.push(c);
            }
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else {
            out.push(c);
        }
    }
    if escaped {
        out.push('\\');
    }
    out
}

fn classify(items: Vec<Item>) -> Result<Vec<Triple>, ClassifyError> {
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let any_list = items.iter().any(|i| matches!(i, Item::List(_)));
    let all_list = items.iter().all(|i| matches!(i, Item::List(_)));

    if all_list {
        let mut triples = Vec::with_capacity(items.len());
        for item in items {
            let Item::List(inner) = item else { unreachable!() };
            triples.push(triple_from_items(inner, true)?);
        }
        return Ok(triples);
    }
    if any_list {
        return Err(ClassifyError::soft(GraphError::MalformedGraph(
            "mixed scalar and list items".into(),
        )));
    }
    // A bare triple without the outer list.
    Ok(vec![triple_from_items(items, false)?])
}

fn triple_from_items(items: Vec<Item>, hard: bool) -> Result<Triple, ClassifyError> {
    let err = |e: GraphError| {
        if hard {
            ClassifyError::hard(e)
        } else {
            ClassifyError::soft(e)
        }
    };
    if items.len() != 3 {
        return Err(err(GraphError::ArityViolation(items.len())));
    }
    let mut fields = Vec::with_capacity(3);
    for item in items {
        match item {
            Item::Scalar(s) => {
                if s.trim().is_empty() {
                    return Err(err(GraphError::EmptyField));
                }
                fields.push(s);
            }
            Item::List(_) => {
                return Err(err(GraphError::MalformedGraph(
                    "nested list inside a triple".into(),
                )))
            }
        }
    }
    let mut it = fields.into_iter();
    Ok(Triple::new(
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(raw: &str) -> Result<SemanticGraph, GraphError> {
        parse_graph(raw, &NormalizationPolicy::default())
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(s, p, o)
    }

    #[test]
    fn parses_quoted_list_of_lists() {
        let g = parse(r#"[["Francisco Uranga", "occupation", "swimmer"]]"#).unwrap();
        assert_eq!(
            g.triples(),
            &[t("Francisco Uranga", "occupation", "swimmer")]
        );
    }

    #[test]
    fn parses_empty_list() {
        assert!(parse("[]").unwrap().is_empty());
        assert!(parse("[  ]").unwrap().is_empty());
    }

    #[test]
    fn dedupes_repeated_triples() {
        let g = parse("[[A, r, B], [A, r, B]]").unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn accepts_bare_triple() {
        let g = parse("[Francisco Uranga, occupation, swimmer]").unwrap();
        assert_eq!(
            g.triples(),
            &[t("Francisco Uranga", "occupation", "swimmer")]
        );
    }

    #[test]
    fn accepts_single_quotes_and_mixed_quoting() {
        let g = parse(r#"[['Alan Shepard', birthPlace, "New Hampshire"]]"#).unwrap();
        assert_eq!(g.triples(), &[t("Alan Shepard", "birthPlace", "New Hampshire")]);
    }

    #[test]
    fn recovers_graph_from_chatter() {
        let g = parse("Sure! Here is the semantic graph:\n[[A, r, B], [C, s, D]]\nHope that helps.")
            .unwrap();
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn skips_citation_brackets_in_chatter() {
        let g = parse("As noted in [1] and [2, 3], the graph is [[A, r, B]].").unwrap();
        assert_eq!(g.triples(), &[t("A", "r", "B")]);
    }

    #[test]
    fn rejects_quadruplet_inner_list() {
        assert_eq!(
            parse("[[a, b, c, d]]"),
            Err(GraphError::ArityViolation(4))
        );
        assert_eq!(
            parse("[[a, b, c], [a, b, c, d]]"),
            Err(GraphError::ArityViolation(4))
        );
    }

    #[test]
    fn rejects_bare_list_with_wrong_arity() {
        assert_eq!(parse("[a, b]"), Err(GraphError::ArityViolation(2)));
    }

    #[test]
    fn rejects_empty_and_bracketless_input() {
        assert!(matches!(parse(""), Err(GraphError::MalformedGraph(_))));
        assert!(matches!(parse("   "), Err(GraphError::MalformedGraph(_))));
        assert!(matches!(parse("no idea"), Err(GraphError::MalformedGraph(_))));
    }

    #[test]
    fn rejects_unbalanced_brackets() {
        assert!(matches!(parse("[[a, b, c"), Err(GraphError::MalformedGraph(_))));
        assert!(matches!(parse("a ] b"), Err(GraphError::MalformedGraph(_))));
    }

    #[test]
    fn salvages_prefix_of_truncated_output() {
        // The outer list never closes but the first inner triple does.
        let g = parse("[[A, r, B], [C, s").unwrap();
        assert_eq!(g.triples(), &[t("A", "r", "B")]);
    }

    #[test]
    fn quoted_commas_and_brackets_are_content() {
        let g = parse(r#"[["a, b", "x [sic]", c]]"#).unwrap();
        assert_eq!(g.triples(), &[t("a, b", "x [sic]", "c")]);
    }

    #[test]
    fn rejects_empty_field() {
        assert_eq!(parse("[[a, , c]]"), Err(GraphError::EmptyField));
    }

    #[test]
    fn rejects_deeper_nesting() {
        assert!(matches!(
            parse("[[[a, b, c]]]"),
            Err(GraphError::MalformedGraph(_)) | Err(GraphError::ArityViolation(_))
        ));
    }

    #[test]
    fn tolerates_trailing_comma() {
        let g = parse("[[A, r, B],]").unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn apostrophes_inside_words_are_content() {
        let g = parse("[[O'Brien, wrote, don't panic]]").unwrap();
        assert_eq!(g.triples(), &[t("O'Brien", "wrote", "don't panic")]);
    }

    #[test]
    fn round_trips_fields_with_delimiters() {
        let policy = NormalizationPolicy::strict();
        let g = SemanticGraph::from_triples(
            [
                t("a, b", "r", "c"),
                t(" padded ", "x[0]", "back\\slash"),
                t("\"quoted\"", "'q'", "plain"),
            ],
            &policy,
        );
        let parsed = parse_graph(&g.serialize(), &policy).unwrap();
        assert_eq!(parsed, g);
    }

    #[test]
    fn triple_regions_collects_separate_groups() {
        let policy = NormalizationPolicy::default();
        let triples = parse_triple_regions("[A, r, B], and also [C, s, D]", &policy);
        assert_eq!(triples, vec![t("A", "r", "B"), t("C", "s", "D")]);
    }

    #[test]
    fn triple_regions_skips_unparsable_groups() {
        let policy = NormalizationPolicy::default();
        let triples = parse_triple_regions("see [1] then [A, r, B]", &policy);
        assert_eq!(triples, vec![t("A", "r", "B")]);
    }
}
