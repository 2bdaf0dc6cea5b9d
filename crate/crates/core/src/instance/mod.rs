//! Rooted prize-collecting Steiner tree instances, trees and their costs.

mod format;
mod generate;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::DisjointSets;
use crate::rational::{Penalty, Rational};

pub use format::{parse_instance, serialize_instance, ParseError};
pub use generate::{gen_random, gen_star};

/// 1-based vertex identifier.
pub type VertexId = usize;
/// Index into [`PcstInstance::edges`].
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Rational,
    /// Zero-weight root link added by [`PcstInstance::augment_with_root_edges`].
    pub root_link: bool,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance needs at least one vertex")]
    NoVertices,
    #[error("root {root} is outside 1..={vertex_count}")]
    RootOutOfRange { root: VertexId, vertex_count: usize },
    #[error("edge {edge} references vertex {vertex} outside 1..={vertex_count}")]
    VertexOutOfRange {
        edge: EdgeId,
        vertex: VertexId,
        vertex_count: usize,
    },
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} duplicates the pair ({u}, {v})")]
    DuplicateEdge { edge: EdgeId, u: VertexId, v: VertexId },
    #[error("edge {edge} has negative weight {weight}")]
    NegativeWeight { edge: EdgeId, weight: Rational },
    #[error("vertex {vertex} has negative penalty {penalty}")]
    NegativePenalty { vertex: VertexId, penalty: Rational },
    #[error("penalty given for vertex {vertex} outside 1..={vertex_count}")]
    PenaltyOutOfRange { vertex: VertexId, vertex_count: usize },
    #[error("the root may not carry a finite penalty")]
    RootPenalty,
    #[error("graph is disconnected: vertex {vertex} cannot reach the root")]
    Disconnected { vertex: VertexId },
    #[error("scaling factor must be positive, got {0}")]
    NonPositiveScale(Rational),
    #[error("root cannot be the target of a root link")]
    RootLinkToRoot,
    #[error("edge {edge} is marked as a root link but is not a zero-weight edge at the root")]
    BadRootLink { edge: EdgeId },
}

/// Weighted undirected graph with a designated root and per-vertex penalties.
///
/// Immutable once built; every constructor validates connectivity, ranges and
/// the sign of all weights and penalties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcstInstance {
    vertex_count: usize,
    edges: Vec<Edge>,
    root: VertexId,
    penalties: Vec<Penalty>,
}

impl PcstInstance {
    /// Builds an instance; vertices missing from `penalties` get penalty 0.
    pub fn new(
        vertex_count: usize,
        root: VertexId,
        edges: Vec<(VertexId, VertexId, Rational)>,
        penalties: &BTreeMap<VertexId, Rational>,
    ) -> Result<Self, InstanceError> {
        let edges = edges
            .into_iter()
            .map(|(u, v, weight)| Edge {
                u,
                v,
                weight,
                root_link: false,
            })
            .collect();
        Self::from_parts(vertex_count, root, edges, penalties)
    }

    pub(crate) fn from_parts(
        vertex_count: usize,
        root: VertexId,
        edges: Vec<Edge>,
        penalties: &BTreeMap<VertexId, Rational>,
    ) -> Result<Self, InstanceError> {
        if vertex_count == 0 {
            return Err(InstanceError::NoVertices);
        }
        if root == 0 || root > vertex_count {
            return Err(InstanceError::RootOutOfRange { root, vertex_count });
        }
        let mut table = vec![Penalty::Finite(Rational::zero()); vertex_count];
        for (&v, p) in penalties {
            if v == 0 || v > vertex_count {
                return Err(InstanceError::PenaltyOutOfRange {
                    vertex: v,
                    vertex_count,
                });
            }
            if v == root {
                return Err(InstanceError::RootPenalty);
            }
            table[v - 1] = Penalty::Finite(p.clone());
        }
        table[root - 1] = Penalty::Infinite;
        let inst = PcstInstance {
            vertex_count,
            edges,
            root,
            penalties: table,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.vertex_count;
        if n == 0 {
            return Err(InstanceError::NoVertices);
        }
        if self.root == 0 || self.root > n {
            return Err(InstanceError::RootOutOfRange {
                root: self.root,
                vertex_count: n,
            });
        }
        let mut seen = BTreeSet::new();
        for (id, e) in self.edges.iter().enumerate() {
            for x in [e.u, e.v] {
                if x == 0 || x > n {
                    return Err(InstanceError::VertexOutOfRange {
                        edge: id,
                        vertex: x,
                        vertex_count: n,
                    });
                }
            }
            if e.u == e.v {
                return Err(InstanceError::SelfLoop {
                    edge: id,
                    vertex: e.u,
                });
            }
            if e.weight.is_negative() {
                return Err(InstanceError::NegativeWeight {
                    edge: id,
                    weight: e.weight.clone(),
                });
            }
            if e.root_link {
                if !e.weight.is_zero() || !e.touches(self.root) {
                    return Err(InstanceError::BadRootLink { edge: id });
                }
                continue;
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(InstanceError::DuplicateEdge {
                    edge: id,
                    u: e.u,
                    v: e.v,
                });
            }
        }
        for v in 1..=n {
            match &self.penalties[v - 1] {
                Penalty::Infinite if v != self.root => {
                    return Err(InstanceError::RootPenalty);
                }
                Penalty::Finite(_) if v == self.root => return Err(InstanceError::RootPenalty),
                Penalty::Finite(p) if p.is_negative() => {
                    return Err(InstanceError::NegativePenalty {
                        vertex: v,
                        penalty: p.clone(),
                    })
                }
                _ => {}
            }
        }
        let mut dsu = DisjointSets::new(n + 1);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        if let Some(v) = (1..=n).find(|&v| !dsu.same(v, self.root)) {
            return Err(InstanceError::Disconnected { vertex: v });
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        1..=self.vertex_count
    }

    pub fn non_root_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| v != self.root)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn penalty(&self, v: VertexId) -> &Penalty {
        &self.penalties[v - 1]
    }

    /// Finite penalty of a non-root vertex.
    ///
    /// Panics on the root: its penalty never enters arithmetic.
    pub fn finite_penalty(&self, v: VertexId) -> &Rational {
        self.penalties[v - 1]
            .finite()
            .expect("the root penalty is infinite and never summed")
    }

    /// Sum of penalties over `vs`, none of which may be the root.
    pub fn penalty_of<I: IntoIterator<Item = VertexId>>(&self, vs: I) -> Rational {
        vs.into_iter()
            .fold(Rational::zero(), |acc, v| acc + self.finite_penalty(v))
    }

    pub fn edge_cost<'a, I: IntoIterator<Item = &'a EdgeId>>(&self, ids: I) -> Rational {
        ids.into_iter()
            .fold(Rational::zero(), |acc, &e| acc + &self.edges[e].weight)
    }

    /// Copy of this instance with different finite penalties (root excluded).
    pub fn with_penalties<F>(&self, mut f: F) -> Self
    where
        F: FnMut(VertexId, &Rational) -> Rational,
    {
        let penalties = self
            .vertices()
            .map(|v| match &self.penalties[v - 1] {
                Penalty::Finite(p) => Penalty::Finite(f(v, p)),
                Penalty::Infinite => Penalty::Infinite,
            })
            .collect();
        PcstInstance {
            penalties,
            ..self.clone()
        }
    }

    /// Divides every finite penalty by `beta`.
    pub fn scale_penalties(&self, beta: &Rational) -> Result<Self, InstanceError> {
        if !beta.is_positive() {
            return Err(InstanceError::NonPositiveScale(beta.clone()));
        }
        Ok(self.with_penalties(|_, p| p / beta))
    }

    /// Sets the penalty of every vertex in `targets` to zero.
    pub fn zero_penalties(&self, targets: &BTreeSet<VertexId>) -> Self {
        self.with_penalties(|v, p| {
            if targets.contains(&v) {
                Rational::zero()
            } else {
                p.clone()
            }
        })
    }

    /// Appends one zero-weight root link per target vertex.
    pub fn augment_with_root_edges(
        &self,
        targets: &BTreeSet<VertexId>,
    ) -> Result<Self, InstanceError> {
        if targets.contains(&self.root) {
            return Err(InstanceError::RootLinkToRoot);
        }
        let mut out = self.clone();
        for &u in targets {
            if u == 0 || u > self.vertex_count {
                return Err(InstanceError::VertexOutOfRange {
                    edge: out.edges.len(),
                    vertex: u,
                    vertex_count: self.vertex_count,
                });
            }
            out.edges.push(Edge {
                u: self.root,
                v: u,
                weight: Rational::zero(),
                root_link: true,
            });
        }
        Ok(out)
    }

    /// Edge ids incident to each vertex, indexed by vertex id.
    pub fn incidence(&self) -> Vec<Vec<EdgeId>> {
        let mut adj = vec![Vec::new(); self.vertex_count + 1];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.u].push(id);
            adj[e.v].push(id);
        }
        adj
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(serialize_instance(self).as_bytes()))
    }

    /// Fingerprint of the graph and root only, ignoring penalties.
    pub fn graph_fingerprint(&self) -> String {
        let mut text = format!("{} {}\n", self.vertex_count, self.root);
        for e in &self.edges {
            text.push_str(&format!("{} {} {} {}\n", e.u, e.v, e.weight, e.root_link));
        }
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// A subtree containing the root: edge ids plus their endpoint set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tree {
    pub edges: BTreeSet<EdgeId>,
    pub vertices: BTreeSet<VertexId>,
}

impl Tree {
    pub fn root_only(root: VertexId) -> Self {
        Tree {
            edges: BTreeSet::new(),
            vertices: BTreeSet::from([root]),
        }
    }

    /// Tree spanned by `edges`; the vertex set is their endpoints plus the root.
    pub fn from_edges(inst: &PcstInstance, edges: BTreeSet<EdgeId>) -> Self {
        let mut vertices = BTreeSet::from([inst.root()]);
        for &e in &edges {
            let edge = inst.edge(e);
            vertices.insert(edge.u);
            vertices.insert(edge.v);
        }
        Tree { edges, vertices }
    }

    /// Checks that this is a tree of `inst` whose vertices are exactly its
    /// endpoints plus the root.
    pub fn check(&self, inst: &PcstInstance) -> Result<(), String> {
        if !self.vertices.contains(&inst.root()) {
            return Err("tree does not contain the root".into());
        }
        if let Some(&e) = self.edges.iter().find(|&&e| e >= inst.edges().len()) {
            return Err(format!("edge id {e} out of range"));
        }
        let expected = Tree::from_edges(inst, self.edges.clone());
        if expected.vertices != self.vertices {
            return Err("vertex set differs from edge endpoints plus root".into());
        }
        if self.edges.len() + 1 != self.vertices.len() {
            return Err(format!(
                "{} edges on {} vertices is not a tree",
                self.edges.len(),
                self.vertices.len()
            ));
        }
        let mut dsu = DisjointSets::new(inst.vertex_count() + 1);
        for &e in &self.edges {
            let edge = inst.edge(e);
            if !dsu.union(edge.u, edge.v) {
                return Err(format!("edge {e} closes a cycle"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    /// Endpoint pairs, for display.
    pub fn edge_pairs(&self, inst: &PcstInstance) -> Vec<(VertexId, VertexId)> {
        self.edges
            .iter()
            .map(|&e| {
                let edge = inst.edge(e);
                (edge.u, edge.v)
            })
            .collect()
    }
}

/// A tree together with its cost breakdown against some penalty function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub tree: Tree,
    pub edge_cost: Rational,
    pub penalty_cost: Rational,
    pub total_cost: Rational,
}

impl Solution {
    /// Prices `tree` against the edge weights and penalties of `inst`.
    pub fn priced(inst: &PcstInstance, tree: Tree) -> Self {
        let edge_cost = inst.edge_cost(&tree.edges);
        let penalty_cost = inst.penalty_of(inst.vertices().filter(|v| !tree.contains(*v)));
        let total_cost = &edge_cost + &penalty_cost;
        Solution {
            tree,
            edge_cost,
            penalty_cost,
            total_cost,
        }
    }

    pub fn check(&self, inst: &PcstInstance) -> Result<(), String> {
        self.tree.check(inst)?;
        let repriced = Solution::priced(inst, self.tree.clone());
        if repriced != *self {
            return Err(format!(
                "cost breakdown ({}, {}, {}) does not match recomputed ({}, {}, {})",
                self.edge_cost,
                self.penalty_cost,
                self.total_cost,
                repriced.edge_cost,
                repriced.penalty_cost,
                repriced.total_cost
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn path3() -> PcstInstance {
        PcstInstance::new(
            3,
            1,
            vec![(1, 2, int(1)), (2, 3, int(2))],
            &BTreeMap::from([(2, int(0)), (3, int(3))]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_disconnected_graph() {
        let err = PcstInstance::new(3, 1, vec![(1, 2, int(1))], &BTreeMap::new()).unwrap_err();
        assert_eq!(err, InstanceError::Disconnected { vertex: 3 });
    }

    #[test]
    fn rejects_bad_edges_and_penalties() {
        let none = BTreeMap::new();
        assert!(matches!(
            PcstInstance::new(2, 1, vec![(1, 1, int(1)), (1, 2, int(1))], &none),
            Err(InstanceError::SelfLoop { .. })
        ));
        assert!(matches!(
            PcstInstance::new(2, 1, vec![(1, 2, int(1)), (2, 1, int(1))], &none),
            Err(InstanceError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            PcstInstance::new(2, 1, vec![(1, 2, int(-1))], &none),
            Err(InstanceError::NegativeWeight { .. })
        ));
        assert!(matches!(
            PcstInstance::new(2, 1, vec![(1, 2, int(1))], &BTreeMap::from([(2, int(-3))])),
            Err(InstanceError::NegativePenalty { .. })
        ));
        assert!(matches!(
            PcstInstance::new(2, 1, vec![(1, 2, int(1))], &BTreeMap::from([(1, int(3))])),
            Err(InstanceError::RootPenalty)
        ));
        assert!(matches!(
            PcstInstance::new(2, 3, vec![(1, 2, int(1))], &none),
            Err(InstanceError::RootOutOfRange { .. })
        ));
    }

    #[test]
    fn scaling_is_exact_and_invertible() {
        let inst = path3();
        let beta = frac(313, 250);
        let scaled = inst.scale_penalties(&beta).unwrap();
        assert_eq!(scaled.finite_penalty(3), &(int(3) / &beta));
        assert!(scaled.penalty(1).is_infinite());
        assert_eq!(scaled.edges(), inst.edges());
        let back = scaled.scale_penalties(&(int(1) / &beta)).unwrap();
        assert_eq!(back, inst);
        assert_eq!(inst.scale_penalties(&int(1)).unwrap(), inst);
        assert!(inst.scale_penalties(&int(0)).is_err());
        assert!(inst.scale_penalties(&int(-2)).is_err());
    }

    #[test]
    fn augmenting_adds_marked_zero_edges() {
        let inst = path3();
        assert_eq!(inst.augment_with_root_edges(&BTreeSet::new()).unwrap(), inst);
        let aug = inst.augment_with_root_edges(&BTreeSet::from([2, 3])).unwrap();
        assert_eq!(aug.edges().len(), 4);
        assert!(aug.edges()[2].root_link && aug.edges()[3].root_link);
        assert!(aug.edges()[2].weight.is_zero());
        // parallel root link next to the existing 1-2 edge is allowed
        aug.validate().unwrap();
        assert_eq!(
            inst.augment_with_root_edges(&BTreeSet::from([1])),
            Err(InstanceError::RootLinkToRoot)
        );
    }

    #[test]
    fn tree_check_catches_malformed_trees() {
        let inst = path3();
        let good = Tree::from_edges(&inst, BTreeSet::from([0]));
        good.check(&inst).unwrap();
        let mut missing_vertex = good.clone();
        missing_vertex.vertices.remove(&2);
        assert!(missing_vertex.check(&inst).is_err());
        let detached = Tree {
            edges: BTreeSet::from([1]),
            vertices: BTreeSet::from([1, 2, 3]),
        };
        assert!(detached.check(&inst).is_err());
    }

    #[test]
    fn pricing_matches_definition() {
        let inst = path3();
        let sol = Solution::priced(&inst, Tree::root_only(1));
        assert_eq!(sol.edge_cost, int(0));
        assert_eq!(sol.penalty_cost, int(3));
        assert_eq!(sol.total_cost, int(3));
        let full = Solution::priced(&inst, Tree::from_edges(&inst, BTreeSet::from([0, 1])));
        assert_eq!(full.penalty_cost, int(0));
        assert_eq!(full.total_cost, int(3));
        full.check(&inst).unwrap();
    }
}
