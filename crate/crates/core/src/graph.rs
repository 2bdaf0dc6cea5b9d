//! Small graph utilities: disjoint sets, Kruskal, shortest paths.

use std::collections::BTreeSet;

use crate::instance::{EdgeId, PcstInstance, VertexId};
use crate::rational::Rational;

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(len: usize) -> Self {
        DisjointSets {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns false when `a` and `b` were already in the same set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Kruskal over the given candidate edges, ties broken by edge id.
///
/// Returns the chosen edges; the result spans each connected piece of the
/// candidate subgraph.
pub fn kruskal<I>(inst: &PcstInstance, candidates: I) -> BTreeSet<EdgeId>
where
    I: IntoIterator<Item = EdgeId>,
{
    let mut order: Vec<EdgeId> = candidates.into_iter().collect();
    order.sort_by(|&a, &b| inst.edge(a).weight.cmp(&inst.edge(b).weight).then(a.cmp(&b)));
    let mut dsu = DisjointSets::new(inst.vertex_count() + 1);
    order
        .into_iter()
        .filter(|&e| {
            let edge = inst.edge(e);
            dsu.union(edge.u, edge.v)
        })
        .collect()
}

/// Minimum spanning tree of the subgraph induced by `vertices`, or `None` if
/// that subgraph is disconnected.
pub fn induced_mst(inst: &PcstInstance, vertices: &BTreeSet<VertexId>) -> Option<BTreeSet<EdgeId>> {
    let inside = inst
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| vertices.contains(&e.u) && vertices.contains(&e.v))
        .map(|(id, _)| id);
    let tree = kruskal(inst, inside);
    (tree.len() + 1 == vertices.len()).then_some(tree)
}

/// All-pairs shortest paths (Floyd–Warshall) with path recovery by edge id.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    dist: Vec<Vec<Option<Rational>>>,
    /// Next edge on a shortest path from `a` towards `b`.
    next: Vec<Vec<Option<EdgeId>>>,
}

impl ShortestPaths {
    pub fn new(inst: &PcstInstance) -> Self {
        let n = inst.vertex_count() + 1;
        let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
        let mut next = vec![vec![None; n]; n];
        for v in inst.vertices() {
            dist[v][v] = Some(Rational::from_integer(0.into()));
        }
        for (id, e) in inst.edges().iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let better = match &dist[a][b] {
                    None => true,
                    Some(d) => e.weight < *d,
                };
                if better {
                    dist[a][b] = Some(e.weight.clone());
                    next[a][b] = Some(id);
                }
            }
        }
        for k in inst.vertices() {
            for i in inst.vertices() {
                let Some(dik) = dist[i][k].clone() else { continue };
                for j in inst.vertices() {
                    let Some(dkj) = &dist[k][j] else { continue };
                    let through = &dik + dkj;
                    let better = match &dist[i][j] {
                        None => true,
                        Some(d) => through < *d,
                    };
                    if better {
                        dist[i][j] = Some(through);
                        next[i][j] = next[i][k];
                    }
                }
            }
        }
        ShortestPaths { dist, next }
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> Option<&Rational> {
        self.dist[a][b].as_ref()
    }

    /// Edge ids along a shortest `a`–`b` path.
    pub fn path(&self, inst: &PcstInstance, a: VertexId, b: VertexId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut at = a;
        while at != b {
            let e = self.next[at][b].expect("path requested between disconnected vertices");
            out.push(e);
            at = inst.edge(e).other(at);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use std::collections::BTreeMap;

    fn square() -> PcstInstance {
        // 1-2-3-4-1 with a heavy diagonal 1-3
        PcstInstance::new(
            4,
            1,
            vec![
                (1, 2, int(1)),
                (2, 3, int(1)),
                (3, 4, int(1)),
                (4, 1, int(5)),
                (1, 3, int(3)),
            ],
            &BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn disjoint_sets_merge() {
        let mut d = DisjointSets::new(5);
        assert!(d.union(0, 1));
        assert!(d.union(3, 4));
        assert!(!d.union(1, 0));
        assert!(d.same(3, 4));
        assert!(!d.same(1, 3));
        d.union(1, 4);
        assert!(d.same(0, 3));
    }

    #[test]
    fn kruskal_picks_light_edges() {
        let inst = square();
        let t = kruskal(&inst, 0..inst.edges().len());
        assert_eq!(t, BTreeSet::from([0, 1, 2]));
        assert_eq!(induced_mst(&inst, &BTreeSet::from([1, 3])), Some(BTreeSet::from([4])));
        assert_eq!(induced_mst(&inst, &BTreeSet::from([2, 4])), None);
    }

    #[test]
    fn shortest_paths_recover_edges() {
        let inst = square();
        let sp = ShortestPaths::new(&inst);
        assert_eq!(sp.distance(1, 3), Some(&int(2)));
        assert_eq!(sp.distance(1, 4), Some(&int(3)));
        let p = sp.path(&inst, 4, 1);
        assert_eq!(inst.edge_cost(&p), int(3));
        assert!(sp.path(&inst, 2, 2).is_empty());
    }
}
