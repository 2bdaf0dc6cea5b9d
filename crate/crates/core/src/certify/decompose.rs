//! Coloring-mass decomposition of a moat run relative to an optimal tree, and
//! the inequalities that bound each candidate solution in terms of it.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::instance::{PcstInstance, Solution, VertexId};
use crate::moat::{gw_cost, run_gw, MoatRun, Violation};
use crate::rational::{int, Rational};
use crate::steiner::{steiner_tree, SteinerError, SteinerKind, SteinerSolver};

use super::oracle::{oracle_pcst, oracle_steiner_cost};
use super::CertifyError;

/// Coloring mass split by optimal-tree membership and death.
///
/// A: in the optimal tree and live; B: in the optimal tree and dead;
/// C: outside it and live; D: outside it and dead. Primed parts of B and D
/// end up in the moat tree, doubly primed parts do not. `b1`/`b2` split the
/// B mass by whether the coloring set cut one or several optimal edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecompStats {
    pub r_a: Rational,
    pub r_b: Rational,
    pub r_c: Rational,
    pub r_d: Rational,
    pub r_bp: Rational,
    pub r_bz: Rational,
    pub r_dp: Rational,
    pub r_dz: Rational,
    pub b1: Rational,
    pub b2: Rational,
}

impl DecompStats {
    pub fn check_invariants(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.r_b != &self.r_bp + &self.r_bz {
            out.push(Violation::new("decomposition", "r_B != r_B' + r_B''"));
        }
        if self.r_d != &self.r_dp + &self.r_dz {
            out.push(Violation::new("decomposition", "r_D != r_D' + r_D''"));
        }
        if self.r_b != &self.b1 + &self.b2 {
            out.push(Violation::new("decomposition", "r_B != b1 + b2"));
        }
        let fields = [
            ("r_A", &self.r_a),
            ("r_B", &self.r_b),
            ("r_C", &self.r_c),
            ("r_D", &self.r_d),
            ("r_B'", &self.r_bp),
            ("r_B''", &self.r_bz),
            ("r_D'", &self.r_dp),
            ("r_D''", &self.r_dz),
            ("b1", &self.b1),
            ("b2", &self.b2),
        ];
        for (name, value) in fields {
            if *value < Rational::zero() {
                out.push(Violation::new("decomposition", format!("{name} = {value} is negative")));
            }
        }
        out
    }
}

/// Splits the coloring of `run` (made on the scaled copy of `inst`) against
/// the optimal solution `opt` of `inst`.
pub fn decompose(inst: &PcstInstance, run: &MoatRun, opt: &Solution) -> Result<DecompStats, CertifyError> {
    if run.graph_fingerprint != inst.graph_fingerprint() {
        return Err(CertifyError::FingerprintMismatch);
    }
    opt.tree.check(inst).map_err(CertifyError::BadOptimum)?;
    let in_opt = |v: VertexId| opt.tree.contains(v);
    let in_gw = |v: VertexId| run.tree.tree.contains(v);
    let mut s = DecompStats::default();
    for v in inst.non_root_vertices() {
        let y = run.y(v);
        match (in_opt(v), run.is_dead(v)) {
            (true, false) => s.r_a += &y,
            (true, true) => {
                s.r_b += &y;
                if in_gw(v) {
                    s.r_bp += &y;
                } else {
                    s.r_bz += &y;
                }
            }
            (false, false) => s.r_c += &y,
            (false, true) => {
                s.r_d += &y;
                if in_gw(v) {
                    s.r_dp += &y;
                } else {
                    s.r_dz += &y;
                }
            }
        }
    }
    for seg in &run.history {
        let v = seg.charged_vertex;
        if v == inst.root() || !in_opt(v) || !run.is_dead(v) {
            continue;
        }
        let cut = opt
            .tree
            .edges
            .iter()
            .filter(|&&e| {
                let edge = inst.edge(e);
                seg.set.binary_search(&edge.u).is_ok() != seg.set.binary_search(&edge.v).is_ok()
            })
            .count();
        if cut == 1 {
            s.b1 += &seg.duration;
        } else {
            s.b2 += &seg.duration;
        }
    }
    Ok(s)
}

/// Inputs and derived costs that the per-instance inequalities refer to.
#[derive(Debug, Clone)]
pub struct BoundContext<'a> {
    pub inst: &'a PcstInstance,
    pub run: &'a MoatRun,
    pub opt: &'a Solution,
    pub stats: &'a DecompStats,
    pub beta: &'a Rational,
    pub solver: &'a SteinerSolver,
    /// Target factor for the weighted forms; skipped when absent.
    pub alpha: Option<&'a Rational>,
}

fn check(out: &mut Vec<Violation>, name: &str, lhs: &Rational, rhs: &Rational, relation: &str) {
    let holds = match relation {
        "<=" => lhs <= rhs,
        "=" => lhs == rhs,
        _ => unreachable!("unknown relation"),
    };
    if !holds {
        out.push(Violation::new(name, format!("{lhs} {relation} {rhs} fails")));
    }
}

/// Evaluates every inequality that bounds the optimum from below and the
/// candidate solutions from above in terms of the decomposition.
pub fn check_bounds(ctx: &BoundContext<'_>) -> Result<Vec<Violation>, CertifyError> {
    let BoundContext {
        inst,
        run,
        opt,
        stats: s,
        beta,
        solver,
        alpha,
    } = ctx.clone();
    let mut out = Vec::new();
    let opt_cost = &opt.total_cost;

    for v in inst.non_root_vertices() {
        let scaled_y = beta * run.y(v);
        let pi = inst.finite_penalty(v);
        check(&mut out, &format!("scaled dual bound at {v}"), &scaled_y, pi, "<=");
        if run.is_dead(v) {
            check(&mut out, &format!("scaled dual tight at dead {v}"), &scaled_y, pi, "=");
        }
    }

    let beta_cd = beta * (&s.r_c + &s.r_d);
    check(&mut out, "optimum vs its tree", &(&opt.edge_cost + &beta_cd), opt_cost, "<=");
    let lower = &s.r_a + &s.b1 + int(2) * &s.b2 + &beta_cd;
    check(&mut out, "optimum lower bound", &lower, opt_cost, "<=");

    let cost_gw = gw_cost(run, inst);
    let all_mass = &s.r_a + &s.r_b + &s.r_c + &s.r_d;
    // Outside penalties are beta times their duals, so this needs beta <= 2.
    if beta <= &int(2) {
        check(&mut out, "GW upper bound", &cost_gw, &(int(2) * &all_mass), "<=");
    }

    let live: BTreeSet<VertexId> = inst.vertices().filter(|v| !run.is_dead(*v)).collect();
    let st_tree = match steiner_tree(solver, inst, &live) {
        Err(SteinerError::TooManyTerminals { .. }) => {
            steiner_tree(&SteinerSolver::new(SteinerKind::Mst2), inst, &live)?
        }
        other => other?,
    };
    let fallback_factor = if solver.kind == SteinerKind::ExactDp && live.len() > crate::steiner::EXACT_TERMINAL_LIMIT {
        int(2)
    } else {
        solver.declared_factor.clone()
    };
    let cost_st = Solution::priced(inst, st_tree).total_cost;
    let min_steiner = oracle_steiner_cost(inst, &live)?;
    let beta_bd = beta * (&s.r_b + &s.r_d);
    check(
        &mut out,
        "ST upper bound",
        &cost_st,
        &(&fallback_factor * &min_steiner + &beta_bd),
        "<=",
    );
    let steiner_bound = &opt.edge_cost + int(2) * (&s.r_c + &s.r_d);
    check(&mut out, "Steiner tree on live vertices", &min_steiner, &steiner_bound, "<=");

    let residual = inst.zero_penalties(&run.dead_vertices);
    let opt_r = oracle_pcst(&residual)?.total_cost;
    let residual_bound = opt_cost - beta * &s.r_d - &s.b1;
    check(&mut out, "residual optimum bound", &opt_r, &residual_bound, "<=");

    if let Some(alpha) = alpha {
        let two = int(2);
        let gw_bound = alpha * opt_cost
            + (&two - alpha) * &s.r_a
            + (&two - alpha) * &s.b1
            + (&two - int(2) * alpha) * &s.b2
            + (&two - alpha * beta) * &s.r_c
            + (&two - alpha * beta) * &s.r_d;
        if beta <= &int(2) {
            check(&mut out, "GW weighted bound", &cost_gw, &gw_bound, "<=");
        }
        let p = &fallback_factor;
        if alpha >= p {
            let st_bound = alpha * opt_cost
                + (p - alpha) * &s.r_a
                + (p + beta - alpha) * &s.b1
                + (int(2) * p + beta - int(2) * alpha) * &s.b2
                + (int(2) * p - alpha * beta) * &s.r_c
                + (int(2) * p + beta - alpha * beta) * &s.r_d;
            check(&mut out, "ST weighted bound", &cost_st, &st_bound, "<=");
        }
    }
    Ok(out)
}

/// Compares a run on `inst` with a run on `inst` plus zero-weight root links
/// to `targets`: linked vertices must spend nothing, no vertex may spend more,
/// and no new vertex may die.
pub fn root_link_differential(inst: &PcstInstance, targets: &BTreeSet<VertexId>) -> Result<Vec<Violation>, CertifyError> {
    let augmented = inst.augment_with_root_edges(targets)?;
    let base = run_gw(inst);
    let linked = run_gw(&augmented);
    let mut out = Vec::new();
    for v in inst.non_root_vertices() {
        let (y, y2) = (base.y(v), linked.y(v));
        if y2 > y {
            out.push(Violation::new("root links never raise duals", format!("vertex {v}: {y2} > {y}")));
        }
        if targets.contains(&v) && !y2.is_zero() {
            out.push(Violation::new("root-linked vertices spend nothing", format!("vertex {v}: y = {y2}")));
        }
    }
    if let Some(v) = linked.dead_vertices.difference(&base.dead_vertices).next() {
        out.push(Violation::new("root links never add deaths", format!("vertex {v} dies only with links")));
    }
    Ok(out)
}
