//! Line-oriented PCSPG-style instance files.
//!
//! ```text
//! SECTION Graph
//! Nodes 4
//! Edges 3
//! E 1 2 1
//! E 2 3 1
//! E 2 4 3/2
//! END
//! SECTION Terminals
//! Root 1
//! TP 3 3
//! TP 4 0.5
//! END
//! EOF
//! ```
//!
//! Keywords are case-insensitive. Weights and penalties accept integers,
//! decimals and `a/b` fractions. `E0 u v` lines carry zero-weight root links.
//! Unknown sections are skipped with a warning.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{Edge, InstanceError, PcstInstance, VertexId};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: negative {what} {value}")]
    Negative {
        line: usize,
        what: &'static str,
        value: Rational,
    },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Graph,
    Terminals,
    Skipped,
}

struct Tokens<'a> {
    line: usize,
    items: Vec<&'a str>,
}

impl<'a> Tokens<'a> {
    fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        if self.items.len() != n {
            return Err(syntax(
                self.line,
                format!("`{}` expects {} argument(s)", self.items[0], n - 1),
            ));
        }
        Ok(())
    }

    fn index(&self, i: usize) -> Result<usize, ParseError> {
        self.items[i]
            .parse()
            .map_err(|_| syntax(self.line, format!("expected an integer, found `{}`", self.items[i])))
    }

    fn value(&self, i: usize, what: &'static str) -> Result<Rational, ParseError> {
        let value = parse_rational(self.items[i])
            .map_err(|_| syntax(self.line, format!("bad {what} `{}`", self.items[i])))?;
        if value.is_negative() {
            return Err(ParseError::Negative {
                line: self.line,
                what,
                value,
            });
        }
        Ok(value)
    }
}

pub fn parse_instance(text: &str) -> Result<PcstInstance, ParseError> {
    let mut section = Section::None;
    let mut nodes: Option<(usize, usize)> = None;
    let mut declared_edges: Option<(usize, usize)> = None;
    let mut edges: Vec<Edge> = Vec::new();
    let mut root: Option<(usize, VertexId)> = None;
    let mut penalties: BTreeMap<VertexId, (usize, Rational)> = BTreeMap::new();
    let mut saw_eof = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if saw_eof {
            return Err(syntax(line, "content after EOF"));
        }
        let tok = Tokens {
            line,
            items: trimmed.split_whitespace().collect(),
        };
        let keyword = tok.items[0].to_ascii_lowercase();
        if section == Section::None && line == 1 && trimmed.starts_with("33D32945") {
            continue;
        }
        match (section, keyword.as_str()) {
            (Section::None, "section") => {
                let name = tok.items.get(1).map(|s| s.to_ascii_lowercase());
                section = match name.as_deref() {
                    Some("graph") => Section::Graph,
                    Some("terminals") => Section::Terminals,
                    Some("comment") => Section::Skipped,
                    Some(other) => {
                        log::warn!("line {line}: skipping unsupported section `{other}`");
                        Section::Skipped
                    }
                    None => return Err(syntax(line, "SECTION without a name")),
                };
            }
            (Section::None, "eof") => saw_eof = true,
            (Section::None, other) => {
                return Err(syntax(line, format!("unexpected `{other}` outside a section")))
            }
            (_, "end") => section = Section::None,
            (Section::Skipped, _) => {}
            (Section::Graph, "nodes") => {
                tok.expect_len(2)?;
                nodes = Some((line, tok.index(1)?));
            }
            (Section::Graph, "edges") => {
                tok.expect_len(2)?;
                declared_edges = Some((line, tok.index(1)?));
            }
            (Section::Graph, "e") => {
                tok.expect_len(4)?;
                edges.push(Edge {
                    u: tok.index(1)?,
                    v: tok.index(2)?,
                    weight: tok.value(3, "weight")?,
                    root_link: false,
                });
            }
            (Section::Graph, "e0") => {
                tok.expect_len(3)?;
                edges.push(Edge {
                    u: tok.index(1)?,
                    v: tok.index(2)?,
                    weight: Rational::zero(),
                    root_link: true,
                });
            }
            (Section::Terminals, "root") => {
                tok.expect_len(2)?;
                if root.is_some() {
                    return Err(syntax(line, "duplicate Root line"));
                }
                root = Some((line, tok.index(1)?));
            }
            (Section::Terminals, "tp") => {
                tok.expect_len(3)?;
                let v = tok.index(1)?;
                let p = tok.value(2, "penalty")?;
                if penalties.insert(v, (line, p)).is_some() {
                    return Err(syntax(line, format!("duplicate TP line for vertex {v}")));
                }
            }
            (Section::Terminals, "terminals") => {}
            (_, other) => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
    }

    let last = text.lines().count().max(1);
    if section != Section::None {
        return Err(syntax(last, "unterminated SECTION (missing END)"));
    }
    if !saw_eof {
        return Err(syntax(last, "missing EOF"));
    }
    let (nodes_line, vertex_count) = nodes.ok_or_else(|| syntax(last, "missing Nodes line"))?;
    if vertex_count == 0 {
        return Err(syntax(nodes_line, "Nodes must be positive"));
    }
    if let Some((line, m)) = declared_edges {
        if m != edges.len() {
            return Err(syntax(
                line,
                format!("Edges declares {m} but {} E lines follow", edges.len()),
            ));
        }
    }
    let (_, root) = root.ok_or_else(|| syntax(last, "missing Root line"))?;
    if root == 0 || root > vertex_count {
        return Err(ParseError::Invalid(InstanceError::RootOutOfRange {
            root,
            vertex_count,
        }));
    }
    if let Some((line, _)) = penalties.get(&root) {
        return Err(syntax(*line, "the root must not carry a TP line"));
    }
    for (&v, (line, _)) in &penalties {
        if v == 0 || v > vertex_count {
            return Err(syntax(*line, format!("TP vertex {v} outside 1..={vertex_count}")));
        }
    }

    let table: BTreeMap<VertexId, Rational> =
        penalties.into_iter().map(|(v, (_, p))| (v, p)).collect();
    Ok(PcstInstance::from_parts(vertex_count, root, edges, &table)?)
}

pub fn serialize_instance(inst: &PcstInstance) -> String {
    let mut out = String::new();
    out.push_str("SECTION Graph\n");
    let _ = writeln!(out, "Nodes {}", inst.vertex_count());
    let _ = writeln!(out, "Edges {}", inst.edges().len());
    for e in inst.edges() {
        if e.root_link {
            let _ = writeln!(out, "E0 {} {}", e.u, e.v);
        } else {
            let _ = writeln!(out, "E {} {} {}", e.u, e.v, e.weight);
        }
    }
    out.push_str("END\n\nSECTION Terminals\n");
    let _ = writeln!(out, "Root {}", inst.root());
    for v in inst.non_root_vertices() {
        let p = inst.finite_penalty(v);
        if !p.is_zero() {
            let _ = writeln!(out, "TP {v} {p}");
        }
    }
    out.push_str("END\n\nEOF\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_random, gen_star};
    use crate::rational::{frac, int};

    const STAR3: &str = "\
33D32945 STP File, STP Format Version 1.0
SECTION Comment
Name \"star3\"
END

section graph
nodes 4
edges 3
E 1 2 1
e 2 3 1
E 2 4 1.0
END

SECTION Terminals
Terminals 2
Root 1
TP 3 3
TP 4 6/2
END

EOF
";

    fn wrap(graph: &str, terminals: &str) -> String {
        format!("SECTION Graph\n{graph}END\nSECTION Terminals\n{terminals}END\nEOF\n")
    }

    #[test]
    fn parses_star_file() {
        let inst = parse_instance(STAR3).unwrap();
        assert_eq!(inst, gen_star(3, &frac(3, 5)).unwrap());
    }

    #[test]
    fn parses_single_vertex_file() {
        let inst = parse_instance(&wrap("Nodes 1\nEdges 0\n", "Root 1\n")).unwrap();
        assert_eq!(inst.vertex_count(), 1);
        assert!(inst.edges().is_empty());
    }

    #[test]
    fn reports_line_numbers() {
        let bad = wrap("Nodes 2\nEdges 1\nE 1 x 1\n", "Root 1\n");
        assert!(matches!(parse_instance(&bad), Err(ParseError::Syntax { line: 4, .. })));
        let negative = wrap("Nodes 2\nEdges 1\nE 1 2 -1\n", "Root 1\n");
        assert!(matches!(
            parse_instance(&negative),
            Err(ParseError::Negative { line: 4, .. })
        ));
        let neg_pen = wrap("Nodes 2\nEdges 1\nE 1 2 1\n", "Root 1\nTP 2 -3\n");
        assert!(matches!(
            parse_instance(&neg_pen),
            Err(ParseError::Negative { line: 8, .. })
        ));
    }

    #[test]
    fn rejects_structural_problems() {
        let disconnected = wrap("Nodes 3\nEdges 1\nE 1 2 1\n", "Root 1\n");
        assert!(matches!(
            parse_instance(&disconnected),
            Err(ParseError::Invalid(InstanceError::Disconnected { .. }))
        ));
        let bad_root = wrap("Nodes 2\nEdges 1\nE 1 2 1\n", "Root 5\n");
        assert!(matches!(
            parse_instance(&bad_root),
            Err(ParseError::Invalid(InstanceError::RootOutOfRange { .. }))
        ));
        let root_tp = wrap("Nodes 2\nEdges 1\nE 1 2 1\n", "Root 1\nTP 1 4\n");
        assert!(parse_instance(&root_tp).is_err());
        let count = wrap("Nodes 2\nEdges 2\nE 1 2 1\n", "Root 1\n");
        assert!(matches!(parse_instance(&count), Err(ParseError::Syntax { line: 3, .. })));
        let no_eof = "SECTION Graph\nNodes 1\nEND\nSECTION Terminals\nRoot 1\nEND\n";
        assert!(parse_instance(no_eof).is_err());
        let trailing = format!("{}E 1 2 3\n", wrap("Nodes 1\n", "Root 1\n"));
        assert!(parse_instance(&trailing).is_err());
    }

    #[test]
    fn skips_unsupported_sections() {
        let text = "SECTION Graph\nNodes 2\nEdges 1\nE 1 2 1\nEND\nSECTION Coordinates\nDD 1 0 0\nEND\nSECTION Terminals\nRoot 2\nTP 1 1/3\nEND\nEOF\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.finite_penalty(1), &frac(1, 3));
    }

    #[test]
    fn random_instance_round_trips() {
        let inst = gen_random(5, 0.5, 10, 10, 11).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn root_links_and_fractions_round_trip() {
        let inst = gen_star(3, &frac(3, 5)).unwrap();
        let aug = inst
            .augment_with_root_edges(&std::collections::BTreeSet::from([2, 4]))
            .unwrap();
        let text = serialize_instance(&aug);
        assert!(text.contains("E0 1 2"));
        assert_eq!(parse_instance(&text).unwrap(), aug);
        let scaled = inst.scale_penalties(&frac(313, 250)).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&scaled)).unwrap(), scaled);
        assert_eq!(scaled.finite_penalty(3), &(int(750) / int(313)));
    }
}
