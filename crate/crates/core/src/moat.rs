//! Moat growing: the primal-dual growth phase simulated event by event in
//! exact arithmetic, followed by dead-set pruning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::graph::DisjointSets;
use crate::instance::{EdgeId, PcstInstance, Solution, Tree, VertexId};
use crate::rational::{int, sum, Rational};

/// A stretch of time during which `set` was active and spent the coloring
/// potential of `charged_vertex`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringSegment {
    pub set: Vec<VertexId>,
    pub charged_vertex: VertexId,
    pub duration: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoatEvent {
    Deactivate { time: Rational, set: Vec<VertexId> },
    Merge { time: Rational, edge: EdgeId },
}

/// Everything a growth-and-prune run produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoatRun {
    /// Spanning tree built during growth.
    pub forest_edges: BTreeSet<EdgeId>,
    /// Pruned tree, priced against the instance the run was given.
    pub tree: Solution,
    /// Vertices that belonged to some dead set.
    pub dead_vertices: BTreeSet<VertexId>,
    /// Dead sets in deactivation order.
    pub dead_sets: Vec<Vec<VertexId>>,
    pub history: Vec<ColoringSegment>,
    /// Total duration charged to each vertex (root included).
    pub y_v: BTreeMap<VertexId, Rational>,
    /// Total active duration of each set that was ever active for positive time.
    pub y_sets: BTreeMap<Vec<VertexId>, Rational>,
    pub events: Vec<MoatEvent>,
    pub graph_fingerprint: String,
}

impl MoatRun {
    pub fn y(&self, v: VertexId) -> Rational {
        self.y_v.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_dead(&self, v: VertexId) -> bool {
        self.dead_vertices.contains(&v)
    }
}

#[derive(Debug, Clone)]
struct Component {
    members: Vec<VertexId>,
    active: bool,
    has_root: bool,
    /// Unspent potential; meaningless for the root's component.
    potential: Rational,
}

struct Growth<'a> {
    inst: &'a PcstInstance,
    comp_of: Vec<usize>,
    comps: Vec<Option<Component>>,
    dsu: DisjointSets,
    color: Vec<Rational>,
    remaining: Vec<Rational>,
    time: Rational,
    forest: BTreeSet<EdgeId>,
    dead_sets: Vec<Vec<VertexId>>,
    history: Vec<ColoringSegment>,
    y_v: BTreeMap<VertexId, Rational>,
    y_sets: BTreeMap<Vec<VertexId>, Rational>,
    events: Vec<MoatEvent>,
}

impl<'a> Growth<'a> {
    fn new(inst: &'a PcstInstance) -> Self {
        let n = inst.vertex_count();
        let mut remaining = vec![Rational::zero(); n + 1];
        let mut comps = Vec::with_capacity(n + 1);
        comps.push(None);
        for v in inst.vertices() {
            let has_root = v == inst.root();
            let potential = if has_root {
                Rational::zero()
            } else {
                inst.finite_penalty(v).clone()
            };
            remaining[v] = potential.clone();
            comps.push(Some(Component {
                members: vec![v],
                active: true,
                has_root,
                potential,
            }));
        }
        Growth {
            inst,
            comp_of: (0..=n).collect(),
            comps,
            dsu: DisjointSets::new(n + 1),
            color: vec![Rational::zero(); inst.edges().len()],
            remaining,
            time: Rational::zero(),
            forest: BTreeSet::new(),
            dead_sets: Vec::new(),
            history: Vec::new(),
            y_v: inst.vertices().map(|v| (v, Rational::zero())).collect(),
            y_sets: BTreeMap::new(),
            events: Vec::new(),
        }
    }

    fn comp(&self, id: usize) -> &Component {
        self.comps[id].as_ref().expect("live component")
    }

    fn live_components(&self) -> impl Iterator<Item = (usize, &Component)> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    /// Cheapest deactivation: (potential, component id).
    fn next_deactivation(&self) -> Option<(Rational, usize)> {
        self.live_components()
            .filter(|(_, c)| c.active && !c.has_root)
            .map(|(i, c)| (c.potential.clone(), i, c.members[0]))
            .min_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)))
            .map(|(p, i, _)| (p, i))
    }

    fn active_endpoints(&self, e: EdgeId) -> Option<usize> {
        let edge = self.inst.edge(e);
        let (a, b) = (self.comp_of[edge.u], self.comp_of[edge.v]);
        if a == b {
            return None;
        }
        Some(usize::from(self.comp(a).active) + usize::from(self.comp(b).active))
    }

    /// Cheapest edge to finish coloring: (time needed, edge id).
    fn next_merge(&self) -> Option<(Rational, EdgeId)> {
        let mut best: Option<(Rational, EdgeId)> = None;
        for (e, edge) in self.inst.edges().iter().enumerate() {
            let k = match self.active_endpoints(e) {
                Some(k) if k > 0 => k,
                _ => continue,
            };
            let need = (&edge.weight - &self.color[e]) / int(k as i64);
            if best.as_ref().map_or(true, |(b, _)| need < *b) {
                best = Some((need, e));
            }
        }
        best
    }

    fn advance(&mut self, delta: &Rational) {
        if delta.is_zero() {
            return;
        }
        for e in 0..self.color.len() {
            if let Some(k) = self.active_endpoints(e) {
                if k > 0 {
                    self.color[e] += delta * int(k as i64);
                }
            }
        }
        let active: Vec<usize> = self
            .live_components()
            .filter(|(_, c)| c.active)
            .map(|(i, _)| i)
            .collect();
        for id in active {
            self.charge(id, delta);
        }
        self.time += delta;
    }

    fn charge(&mut self, id: usize, delta: &Rational) {
        let comp = self.comps[id].as_mut().expect("live component");
        let set = comp.members.clone();
        *self.y_sets.entry(set.clone()).or_insert_with(Rational::zero) += delta;
        let root = self.inst.root();
        if comp.has_root {
            *self.y_v.get_mut(&root).expect("root tracked") += delta;
            self.history.push(ColoringSegment {
                set,
                charged_vertex: root,
                duration: delta.clone(),
            });
            return;
        }
        comp.potential -= delta;
        let mut left = delta.clone();
        for &v in &set {
            if left.is_zero() {
                break;
            }
            if !self.remaining[v].is_positive() {
                continue;
            }
            let take = left.clone().min(self.remaining[v].clone());
            self.remaining[v] -= &take;
            left -= &take;
            *self.y_v.get_mut(&v).expect("vertex tracked") += &take;
            self.history.push(ColoringSegment {
                set: set.clone(),
                charged_vertex: v,
                duration: take,
            });
        }
        debug_assert!(left.is_zero(), "active set overspent its potential");
    }

    fn deactivate(&mut self, id: usize) {
        let comp = self.comps[id].as_mut().expect("live component");
        comp.active = false;
        let set = comp.members.clone();
        self.events.push(MoatEvent::Deactivate {
            time: self.time.clone(),
            set: set.clone(),
        });
        self.dead_sets.push(set);
    }

    fn merge(&mut self, e: EdgeId) {
        let edge = self.inst.edge(e);
        let (a, b) = (self.comp_of[edge.u], self.comp_of[edge.v]);
        let ca = self.comps[a].take().expect("live component");
        let cb = self.comps[b].take().expect("live component");
        let mut members = ca.members;
        members.extend(cb.members);
        members.sort_unstable();
        for &v in &members {
            self.comp_of[v] = a;
        }
        self.comps[a] = Some(Component {
            members,
            active: true,
            has_root: ca.has_root || cb.has_root,
            potential: ca.potential + cb.potential,
        });
        self.dsu.union(edge.u, edge.v);
        self.forest.insert(e);
        self.events.push(MoatEvent::Merge {
            time: self.time.clone(),
            edge: e,
        });
    }

    fn grow(&mut self) {
        let mut components = self.inst.vertex_count();
        while components > 1 {
            let deact = self.next_deactivation();
            let merge = self
                .next_merge()
                .expect("connected graph always has an edge leaving the root's component");
            match deact {
                Some((d1, id)) if d1 <= merge.0 => {
                    self.advance(&d1);
                    self.deactivate(id);
                }
                _ => {
                    self.advance(&merge.0);
                    self.merge(merge.1);
                    components -= 1;
                }
            }
        }
    }
}

/// Removes dead sets that hang off the forest by a single edge until none is
/// left, scanning dead sets newest first.
fn prune(inst: &PcstInstance, forest: &BTreeSet<EdgeId>, dead_sets: &[Vec<VertexId>]) -> Tree {
    let mut edges = forest.clone();
    loop {
        let mut changed = false;
        for set in dead_sets.iter().rev() {
            let inside: BTreeSet<VertexId> = set.iter().copied().collect();
            let cut: Vec<EdgeId> = edges
                .iter()
                .copied()
                .filter(|&e| {
                    let edge = inst.edge(e);
                    inside.contains(&edge.u) != inside.contains(&edge.v)
                })
                .collect();
            if cut.len() == 1 {
                edges.retain(|&e| {
                    let edge = inst.edge(e);
                    !inside.contains(&edge.u) && !inside.contains(&edge.v)
                });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Tree::from_edges(inst, edges)
}

/// Runs growth and pruning on `inst` with deterministic tie-breaking:
/// deactivations before merges, smallest member then smallest edge id first.
pub fn run_gw(inst: &PcstInstance) -> MoatRun {
    let mut growth = Growth::new(inst);
    growth.grow();
    let tree = prune(inst, &growth.forest, &growth.dead_sets);
    let dead_vertices = growth.dead_sets.iter().flatten().copied().collect();
    log::debug!(
        "moat run: {} events, {} dead sets, tree of {} vertices",
        growth.events.len(),
        growth.dead_sets.len(),
        tree.vertices.len()
    );
    MoatRun {
        tree: Solution::priced(inst, tree),
        forest_edges: growth.forest,
        dead_vertices,
        dead_sets: growth.dead_sets,
        history: growth.history,
        y_v: growth.y_v,
        y_sets: growth.y_sets,
        events: growth.events,
        graph_fingerprint: inst.graph_fingerprint(),
    }
}

/// Cost of the run's tree against the penalties of `original`, which must
/// share the run's graph.
pub fn gw_cost(run: &MoatRun, original: &PcstInstance) -> Rational {
    debug_assert_eq!(run.graph_fingerprint, original.graph_fingerprint());
    Solution::priced(original, run.tree.tree.clone()).total_cost
}

/// A failed invariant: a short check name plus the offending values.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub check: String,
    pub detail: String,
}

impl Violation {
    pub fn new(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Violation {
            check: check.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.detail)
    }
}

fn cut_size(inst: &PcstInstance, set: &BTreeSet<VertexId>, edges: &BTreeSet<EdgeId>) -> usize {
    edges
        .iter()
        .filter(|&&e| {
            let edge = inst.edge(e);
            set.contains(&edge.u) != set.contains(&edge.v)
        })
        .count()
}

/// Re-derives the dual values from the coloring history and checks the
/// accounting identities and cost bounds of the run. Empty means all hold.
pub fn replay_check(run: &MoatRun, inst: &PcstInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let root = inst.root();
    if run.graph_fingerprint != inst.graph_fingerprint() {
        out.push(Violation::new("instance", "run was produced on a different graph"));
        return out;
    }

    let mut y_v: BTreeMap<VertexId, Rational> =
        inst.vertices().map(|v| (v, Rational::zero())).collect();
    let mut y_sets: BTreeMap<Vec<VertexId>, Rational> = BTreeMap::new();
    for (i, seg) in run.history.iter().enumerate() {
        if !seg.duration.is_positive() {
            out.push(Violation::new("history", format!("segment {i} has duration {}", seg.duration)));
        }
        if seg.set.binary_search(&seg.charged_vertex).is_err() {
            out.push(Violation::new(
                "history",
                format!("segment {i} charges {} outside its set", seg.charged_vertex),
            ));
        }
        if seg.set.contains(&root) && seg.charged_vertex != root {
            out.push(Violation::new(
                "history",
                format!("segment {i} contains the root but charges {}", seg.charged_vertex),
            ));
        }
        *y_v.entry(seg.charged_vertex).or_insert_with(Rational::zero) += &seg.duration;
        *y_sets.entry(seg.set.clone()).or_insert_with(Rational::zero) += &seg.duration;
    }
    if y_v != run.y_v {
        out.push(Violation::new("y_v", "per-vertex durations differ from the history"));
    }
    if y_sets != run.y_sets {
        out.push(Violation::new("y_S", "per-set durations differ from the history"));
    }

    let all: BTreeSet<EdgeId> = (0..inst.edges().len()).collect();
    if run.forest_edges.len() + 1 != inst.vertex_count()
        || crate::graph::kruskal(inst, run.forest_edges.iter().copied()).len()
            != run.forest_edges.len()
        || !run.forest_edges.is_subset(&all)
    {
        out.push(Violation::new("forest", "growth forest is not a spanning tree"));
    }
    if let Err(e) = run.tree.check(inst) {
        out.push(Violation::new("tree", e));
    }
    if !run.tree.tree.edges.is_subset(&run.forest_edges) {
        out.push(Violation::new("tree", "pruned tree uses edges outside the forest"));
    }

    let tree = &run.tree.tree;
    let colored: Rational = y_sets
        .iter()
        .map(|(set, y)| {
            let set: BTreeSet<VertexId> = set.iter().copied().collect();
            y * int(cut_size(inst, &set, &tree.edges) as i64)
        })
        .fold(Rational::zero(), |acc, x| acc + x);
    if colored != run.tree.edge_cost {
        out.push(Violation::new(
            "full-coloring",
            format!("c(T) = {} but colored mass on T is {colored}", run.tree.edge_cost),
        ));
    }

    let inside_y = sum(tree.vertices.iter().filter(|&&v| v != root).map(|v| &y_v[v]));
    let outside_y = sum(inst.vertices().filter(|v| !tree.contains(*v)).map(|v| &y_v[&v]));
    let two_inside = int(2) * &inside_y;
    if run.tree.edge_cost > two_inside {
        out.push(Violation::new(
            "tree-weight bound",
            format!("c(T) = {} > 2 * {inside_y}", run.tree.edge_cost),
        ));
    }

    for v in inst.non_root_vertices() {
        let pi = inst.finite_penalty(v);
        let y = &y_v[&v];
        if y > pi {
            out.push(Violation::new("dual bound", format!("y({v}) = {y} > pi = {pi}")));
        }
        if run.is_dead(v) && y != pi {
            out.push(Violation::new(
                "dead vertex tight",
                format!("dead vertex {v} has y = {y} but pi = {pi}"),
            ));
        }
        if !tree.contains(v) && !run.is_dead(v) {
            out.push(Violation::new(
                "pruned vertices dead",
                format!("vertex {v} is outside T but never died"),
            ));
        }
    }

    let bound = two_inside + outside_y;
    if run.tree.total_cost > bound {
        out.push(Violation::new(
            "total cost bound",
            format!("cost {} > {bound}", run.tree.total_cost),
        ));
    }
    out
}
