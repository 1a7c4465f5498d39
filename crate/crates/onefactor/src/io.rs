//! Line-oriented text formats for graphs and factorizations.
//!
//! Graph files:
//!
//! ```text
//! c optional comment lines
//! p mg <num_vertices> <num_edge_lines>
//! e <u> <v> <mult>
//! ```
//!
//! Vertex ids are 0-based; each `e` line aggregates one vertex pair with
//! its multiplicity, and a pair must not repeat. Factorization files:
//!
//! ```text
//! f <num_factors> <num_vertices>
//! m <u1> <v1> <u2> <v2> ...
//! ```
//!
//! with one `m` line per factor listing its disjoint pairs. Writers emit
//! pairs in ascending order, so identical inputs produce byte-identical
//! files.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::factorizer::Factorization;
use crate::multigraph::{GraphError, Multigraph, VertexId};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: expected {expected}, got {got:?}")]
    Malformed {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("line {line}: vertex pair ({u},{v}) repeated")]
    RepeatedPair { line: usize, u: VertexId, v: VertexId },
    #[error("missing header line")]
    MissingHeader,
    #[error("header declares {declared} edge lines but {found} were found")]
    EdgeLineCount { declared: usize, found: usize },
    #[error("header declares {declared} factors but {found} were found")]
    FactorCount { declared: usize, found: usize },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
}

fn fields(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn parse_num(s: &str, line: usize, expected: &'static str) -> Result<usize, FormatError> {
    s.parse().map_err(|_| FormatError::Malformed {
        line,
        expected,
        got: s.to_string(),
    })
}

/// Serializes a graph; one `e` line per vertex pair, ascending.
pub fn write_graph(g: &Multigraph, comments: &[String]) -> String {
    let mults = g.pair_multiplicities();
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").expect("string write");
    }
    writeln!(out, "p mg {} {}", g.num_vertices(), mults.len()).expect("string write");
    for ((u, v), m) in mults {
        writeln!(out, "e {u} {v} {m}").expect("string write");
    }
    out
}

/// Parses a graph file. Pure format checking; graph-level validity
/// (vertex range, loops) is delegated to the graph constructor.
///
/// ```
/// use onefactor::io::read_graph;
///
/// let g = read_graph("c a doubled edge and a single one\np mg 4 2\ne 0 1 2\ne 2 3 1\n").unwrap();
/// assert_eq!(g.num_vertices(), 4);
/// assert_eq!(g.pair_multiplicity(0, 1), 2);
/// ```
pub fn read_graph(text: &str) -> Result<Multigraph, FormatError> {
    let mut g: Option<Multigraph> = None;
    let mut declared_edges = 0usize;
    let mut edge_lines = 0usize;
    let mut seen_pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let f = fields(raw);
        match f.as_slice() {
            [] | ["c", ..] => {}
            ["p", "mg", nv, ne] => {
                if g.is_some() {
                    return Err(FormatError::Malformed {
                        line,
                        expected: "a single header",
                        got: raw.to_string(),
                    });
                }
                let nv = parse_num(nv, line, "vertex count")?;
                declared_edges = parse_num(ne, line, "edge line count")?;
                g = Some(Multigraph::empty(nv));
            }
            ["e", u, v, m] => {
                let graph = g.as_mut().ok_or(FormatError::MissingHeader)?;
                let u = parse_num(u, line, "vertex id")?;
                let v = parse_num(v, line, "vertex id")?;
                let m = parse_num(m, line, "multiplicity")?;
                let key = (u.min(v), u.max(v));
                if !seen_pairs.insert(key) {
                    return Err(FormatError::RepeatedPair { line, u: key.0, v: key.1 });
                }
                graph
                    .add_edges(u, v, m)
                    .map_err(|source| FormatError::Graph { line, source })?;
                edge_lines += 1;
            }
            _ => {
                return Err(FormatError::Malformed {
                    line,
                    expected: "'c', 'p mg', or 'e' line",
                    got: raw.to_string(),
                })
            }
        }
    }
    let g = g.ok_or(FormatError::MissingHeader)?;
    if edge_lines != declared_edges {
        return Err(FormatError::EdgeLineCount { declared: declared_edges, found: edge_lines });
    }
    Ok(g)
}

/// Serializes a factorization as pair lists, each factor's pairs in
/// ascending order. Edge ids are not written; parallel edges are
/// indistinguishable at the file level.
pub fn write_factorization(g: &Multigraph, f: &Factorization, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").expect("string write");
    }
    writeln!(out, "f {} {}", f.num_factors(), g.num_vertices()).expect("string write");
    for factor in f.factors() {
        let mut pairs: Vec<(VertexId, VertexId)> = factor
            .iter()
            .map(|&e| {
                let (u, v) = g.endpoints(e).expect("factor edge in host");
                (u.min(v), u.max(v))
            })
            .collect();
        pairs.sort_unstable();
        out.push('m');
        for (u, v) in pairs {
            write!(out, " {u} {v}").expect("string write");
        }
        out.push('\n');
    }
    out
}

/// Parses a factorization file into pair lists plus the declared vertex
/// count. No graph-level checks happen here; see
/// [`crate::verify::verify_pairing`].
pub fn read_factorization(
    text: &str,
) -> Result<(Vec<Vec<(VertexId, VertexId)>>, usize), FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut factors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let f = fields(raw);
        match f.as_slice() {
            [] | ["c", ..] => {}
            ["f", nf, nv] => {
                if header.is_some() {
                    return Err(FormatError::Malformed {
                        line,
                        expected: "a single header",
                        got: raw.to_string(),
                    });
                }
                header = Some((
                    parse_num(nf, line, "factor count")?,
                    parse_num(nv, line, "vertex count")?,
                ));
            }
            ["m", rest @ ..] => {
                if header.is_none() {
                    return Err(FormatError::MissingHeader);
                }
                if rest.len() % 2 != 0 {
                    return Err(FormatError::Malformed {
                        line,
                        expected: "an even number of vertex ids",
                        got: raw.to_string(),
                    });
                }
                let mut pairs = Vec::with_capacity(rest.len() / 2);
                for chunk in rest.chunks(2) {
                    let u = parse_num(chunk[0], line, "vertex id")?;
                    let v = parse_num(chunk[1], line, "vertex id")?;
                    pairs.push((u, v));
                }
                factors.push(pairs);
            }
            _ => {
                return Err(FormatError::Malformed {
                    line,
                    expected: "'c', 'f', or 'm' line",
                    got: raw.to_string(),
                })
            }
        }
    }
    let (declared, nv) = header.ok_or(FormatError::MissingHeader)?;
    if factors.len() != declared {
        return Err(FormatError::FactorCount { declared, found: factors.len() });
    }
    Ok((factors, nv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let mut g = Multigraph::empty(4);
        g.add_edges(0, 1, 2).unwrap();
        g.add_edge(2, 3).unwrap();
        let text = write_graph(&g, &["seed=7".into()]);
        let back = read_graph(&text).unwrap();
        assert_eq!(back.num_vertices(), 4);
        assert_eq!(back.pair_multiplicities(), g.pair_multiplicities());
        // identical input, identical bytes
        assert_eq!(text, write_graph(&back, &["seed=7".into()]));
    }

    #[test]
    fn repeated_pair_rejected() {
        let text = "p mg 3 2\ne 0 1 1\ne 1 0 1\n";
        assert!(matches!(
            read_graph(text),
            Err(FormatError::RepeatedPair { u: 0, v: 1, .. })
        ));
    }

    #[test]
    fn edge_count_mismatch_rejected() {
        let text = "p mg 3 2\ne 0 1 1\n";
        assert!(matches!(read_graph(text), Err(FormatError::EdgeLineCount { .. })));
    }

    #[test]
    fn loop_rejected_via_graph_error() {
        let text = "p mg 3 1\ne 1 1 1\n";
        assert!(matches!(read_graph(text), Err(FormatError::Graph { .. })));
    }

    #[test]
    fn factorization_round_trip() {
        let g = Multigraph::complete(4);
        let f = Factorization::new(vec![vec![0, 5], vec![1, 4], vec![2, 3]]);
        let text = write_factorization(&g, &f, &[]);
        let (factors, nv) = read_factorization(&text).unwrap();
        assert_eq!(nv, 4);
        assert_eq!(factors.len(), 3);
        assert_eq!(factors[0], vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn factorization_header_mismatch_rejected() {
        let text = "f 2 4\nm 0 1 2 3\n";
        assert!(matches!(
            read_factorization(text),
            Err(FormatError::FactorCount { declared: 2, found: 1 })
        ));
    }
}
