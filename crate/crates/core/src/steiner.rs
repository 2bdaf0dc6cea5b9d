//! Steiner tree subroutines: exact Dreyfus–Wagner for few terminals and the
//! metric-closure MST 2-approximation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{kruskal, ShortestPaths};
use crate::instance::{EdgeId, PcstInstance, Tree, VertexId};
use crate::rational::{int, Rational};

/// Largest terminal set (root included) the exact solver accepts.
pub const EXACT_TERMINAL_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteinerKind {
    ExactDp,
    Mst2,
}

impl fmt::Display for SteinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SteinerKind::ExactDp => "exact",
            SteinerKind::Mst2 => "mst2",
        })
    }
}

impl FromStr for SteinerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "exact_dp" | "dp" => Ok(SteinerKind::ExactDp),
            "mst2" | "mst" => Ok(SteinerKind::Mst2),
            other => Err(format!("unknown Steiner solver `{other}` (expected exact or mst2)")),
        }
    }
}

/// A Steiner subroutine together with the approximation factor it guarantees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerSolver {
    pub kind: SteinerKind,
    pub declared_factor: Rational,
}

impl SteinerSolver {
    pub fn new(kind: SteinerKind) -> Self {
        let declared_factor = match kind {
            SteinerKind::ExactDp => int(1),
            SteinerKind::Mst2 => int(2),
        };
        SteinerSolver {
            kind,
            declared_factor,
        }
    }

    pub fn exact() -> Self {
        Self::new(SteinerKind::ExactDp)
    }

    pub fn mst2() -> Self {
        Self::new(SteinerKind::Mst2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SteinerError {
    #[error("exact Steiner solver supports at most {limit} terminals, got {count}")]
    TooManyTerminals { count: usize, limit: usize },
    #[error("terminal set must contain the root {0}")]
    MissingRoot(VertexId),
    #[error("terminal {vertex} outside 1..={vertex_count}")]
    TerminalOutOfRange { vertex: VertexId, vertex_count: usize },
}

/// Tree of `inst` connecting every vertex of `terminals` (which must include
/// the root). Leaves of the result are always terminals.
pub fn steiner_tree(
    solver: &SteinerSolver,
    inst: &PcstInstance,
    terminals: &BTreeSet<VertexId>,
) -> Result<Tree, SteinerError> {
    if !terminals.contains(&inst.root()) {
        return Err(SteinerError::MissingRoot(inst.root()));
    }
    if let Some(&vertex) = terminals.iter().find(|&&v| v == 0 || v > inst.vertex_count()) {
        return Err(SteinerError::TerminalOutOfRange {
            vertex,
            vertex_count: inst.vertex_count(),
        });
    }
    if terminals.len() == 1 {
        return Ok(Tree::root_only(inst.root()));
    }
    let edges = match solver.kind {
        SteinerKind::ExactDp => {
            if terminals.len() > EXACT_TERMINAL_LIMIT {
                return Err(SteinerError::TooManyTerminals {
                    count: terminals.len(),
                    limit: EXACT_TERMINAL_LIMIT,
                });
            }
            dreyfus_wagner(inst, terminals)
        }
        SteinerKind::Mst2 => metric_closure_mst(inst, terminals),
    };
    Ok(clean_up(inst, edges, terminals))
}

/// MST of the subgraph formed by `edges`, then repeated removal of
/// non-terminal leaves.
fn clean_up(inst: &PcstInstance, edges: BTreeSet<EdgeId>, terminals: &BTreeSet<VertexId>) -> Tree {
    let mut edges = kruskal(inst, edges);
    loop {
        let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &e in &edges {
            let edge = inst.edge(e);
            *degree.entry(edge.u).or_default() += 1;
            *degree.entry(edge.v).or_default() += 1;
        }
        let before = edges.len();
        edges.retain(|&e| {
            let edge = inst.edge(e);
            [edge.u, edge.v]
                .iter()
                .all(|x| degree[x] > 1 || terminals.contains(x))
        });
        if edges.len() == before {
            break;
        }
    }
    Tree::from_edges(inst, edges)
}

#[derive(Debug, Clone)]
enum Back {
    Path { from: VertexId },
    Split { at: VertexId, part: usize },
}

fn dreyfus_wagner(inst: &PcstInstance, terminals: &BTreeSet<VertexId>) -> BTreeSet<EdgeId> {
    let sp = ShortestPaths::new(inst);
    let root = inst.root();
    let others: Vec<VertexId> = terminals.iter().copied().filter(|&t| t != root).collect();
    let k = others.len();
    let n = inst.vertex_count();
    let full = (1usize << k) - 1;
    let dist = |a: VertexId, b: VertexId| sp.distance(a, b).expect("connected graph").clone();

    let mut dp: Vec<Vec<Option<Rational>>> = vec![vec![None; n + 1]; full + 1];
    let mut back: Vec<Vec<Option<Back>>> = vec![vec![None; n + 1]; full + 1];
    for mask in 1..=full {
        if mask.count_ones() == 1 {
            let t = others[mask.trailing_zeros() as usize];
            for v in inst.vertices() {
                dp[mask][v] = Some(dist(t, v));
                back[mask][v] = Some(Back::Path { from: t });
            }
            continue;
        }
        // best split of `mask` at each vertex
        let low = mask & mask.wrapping_neg();
        let mut split: Vec<Option<(Rational, usize)>> = vec![None; n + 1];
        for u in inst.vertices() {
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let part = sub | low;
                if part != mask {
                    let (Some(a), Some(b)) = (&dp[part][u], &dp[mask ^ part][u]) else {
                        unreachable!("smaller masks are filled first")
                    };
                    let cost = a + b;
                    if split[u].as_ref().map_or(true, |(c, _)| cost < *c) {
                        split[u] = Some((cost, part));
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        for v in inst.vertices() {
            let mut best: Option<(Rational, VertexId, usize)> = None;
            for u in inst.vertices() {
                let (c, part) = split[u].as_ref().expect("split exists");
                let cost = c + dist(u, v);
                if best.as_ref().map_or(true, |(b, _, _)| cost < *b) {
                    best = Some((cost, u, *part));
                }
            }
            let (cost, at, part) = best.expect("nonempty vertex set");
            dp[mask][v] = Some(cost);
            back[mask][v] = Some(Back::Split { at, part });
        }
    }

    let mut edges = BTreeSet::new();
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        match back[mask][v].as_ref().expect("filled entry") {
            Back::Path { from } => edges.extend(sp.path(inst, *from, v)),
            Back::Split { at, part } => {
                edges.extend(sp.path(inst, *at, v));
                stack.push((*part, *at));
                stack.push((mask ^ part, *at));
            }
        }
    }
    edges
}

fn metric_closure_mst(inst: &PcstInstance, terminals: &BTreeSet<VertexId>) -> BTreeSet<EdgeId> {
    let sp = ShortestPaths::new(inst);
    let ts: Vec<VertexId> = terminals.iter().copied().collect();
    let mut pairs = Vec::new();
    for (i, &a) in ts.iter().enumerate() {
        for &b in &ts[i + 1..] {
            pairs.push((sp.distance(a, b).expect("connected graph").clone(), a, b));
        }
    }
    pairs.sort();
    let mut dsu = crate::graph::DisjointSets::new(inst.vertex_count() + 1);
    let mut edges = BTreeSet::new();
    for (_, a, b) in pairs {
        if dsu.union(a, b) {
            edges.extend(sp.path(inst, a, b));
        }
    }
    edges
}
