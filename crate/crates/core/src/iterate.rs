//! Iterative best-of-three solver: scale penalties, grow moats, connect the
//! survivors with a Steiner tree, zero the dead penalties and repeat.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::instance::{PcstInstance, Solution, Tree, VertexId};
use crate::moat::run_gw;
use crate::rational::{frac, int, Rational};
use crate::steiner::{steiner_tree, SteinerError, SteinerKind, SteinerSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Candidate {
    #[serde(rename = "GW")]
    Gw,
    #[serde(rename = "ST")]
    St,
    #[serde(rename = "IT")]
    It,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Candidate::Gw => "GW",
            Candidate::St => "ST",
            Candidate::It => "IT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterOptions {
    pub beta: Rational,
    pub solver: SteinerSolver,
    /// Permit `beta > 2`, which voids the 2-approximation guarantee.
    pub allow_beta_above_two: bool,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions {
            beta: default_beta(),
            solver: SteinerSolver::exact(),
            allow_beta_above_two: false,
        }
    }
}

/// 1.252
pub fn default_beta() -> Rational {
    frac(313, 250)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    pub cost_gw: Rational,
    pub cost_st: Rational,
    /// Absent on the last level, where nothing was recursed into.
    pub cost_it: Option<Rational>,
    pub dead: BTreeSet<VertexId>,
    /// Dead vertices whose penalty at this level was still positive.
    pub dead_paid: BTreeSet<VertexId>,
    pub chosen: Candidate,
    pub chosen_cost: Rational,
    /// The exact Steiner solver was over capacity and MST2 ran instead.
    pub steiner_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterTrace {
    /// Number of recursive calls made below the top level.
    pub depth: usize,
    pub levels: Vec<LevelRecord>,
    pub beta: Rational,
    pub solver_factor: Rational,
}

impl IterTrace {
    /// Structural properties every trace must have; returns descriptions of
    /// the ones that fail.
    pub fn check_invariants(&self, inst: &PcstInstance) -> Vec<String> {
        let mut out = Vec::new();
        if self.depth + 1 != self.levels.len() {
            out.push(format!("depth {} but {} levels", self.depth, self.levels.len()));
        }
        if self.depth > inst.vertex_count() {
            out.push(format!("depth {} exceeds |V| = {}", self.depth, inst.vertex_count()));
        }
        let mut paid = BTreeSet::new();
        for (i, level) in self.levels.iter().enumerate() {
            let last = i + 1 == self.levels.len();
            if last != level.dead_paid.is_empty() {
                out.push(format!("level {i}: recursion guard disagrees with dead penalties"));
            }
            if last != level.cost_it.is_none() {
                out.push(format!("level {i}: IT candidate present only when recursing"));
            }
            if !level.dead_paid.is_subset(&level.dead) {
                out.push(format!("level {i}: paid vertices outside K"));
            }
            if let Some(v) = level.dead_paid.intersection(&paid).next() {
                out.push(format!("level {i}: vertex {v} paid twice"));
            }
            paid.extend(level.dead_paid.iter().copied());
            let mut best = level.cost_gw.clone();
            if level.cost_st < best {
                best = level.cost_st.clone();
            }
            if let Some(it) = &level.cost_it {
                if *it < best {
                    best = it.clone();
                }
            }
            if best != level.chosen_cost {
                out.push(format!("level {i}: chosen cost is not the minimum candidate"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IterError {
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(Rational),
    #[error("beta {0} exceeds 2; pass the override to run anyway")]
    BetaAboveTwo(Rational),
    #[error("tree does not contain the root {0}")]
    TreeMissingRoot(VertexId),
    #[error(transparent)]
    Steiner(#[from] SteinerError),
}

/// Prices `tree` against `inst`.
pub fn evaluate_cost(tree: &Tree, inst: &PcstInstance) -> Result<Solution, IterError> {
    if !tree.contains(inst.root()) {
        return Err(IterError::TreeMissingRoot(inst.root()));
    }
    Ok(Solution::priced(inst, tree.clone()))
}

struct Level {
    inst: PcstInstance,
    gw: Solution,
    st: Solution,
    dead: BTreeSet<VertexId>,
    dead_paid: BTreeSet<VertexId>,
    fallback: bool,
}

fn solve_level(inst: PcstInstance, opts: &IterOptions) -> Result<Level, IterError> {
    let scaled = inst.scale_penalties(&opts.beta).expect("beta checked positive");
    let run = run_gw(&scaled);
    let gw = Solution::priced(&inst, run.tree.tree.clone());
    let live: BTreeSet<VertexId> = inst.vertices().filter(|v| !run.is_dead(*v)).collect();
    let (tree, fallback) = match steiner_tree(&opts.solver, &inst, &live) {
        Ok(t) => (t, false),
        Err(SteinerError::TooManyTerminals { count, .. }) => {
            log::info!("{count} live vertices: falling back to the MST Steiner heuristic");
            (steiner_tree(&SteinerSolver::new(SteinerKind::Mst2), &inst, &live)?, true)
        }
        Err(e) => return Err(e.into()),
    };
    let st = Solution::priced(&inst, tree);
    let dead_paid = run
        .dead_vertices
        .iter()
        .copied()
        .filter(|&v| inst.finite_penalty(v).is_positive())
        .collect();
    Ok(Level {
        inst,
        gw,
        st,
        dead: run.dead_vertices,
        dead_paid,
        fallback,
    })
}

/// Runs the iterative solver. Returns the cheapest candidate tree priced
/// against `inst`, and a per-level trace.
pub fn ipcst(inst: &PcstInstance, opts: &IterOptions) -> Result<(Solution, IterTrace), IterError> {
    if !opts.beta.is_positive() {
        return Err(IterError::NonPositiveBeta(opts.beta.clone()));
    }
    if opts.beta > int(2) && !opts.allow_beta_above_two {
        return Err(IterError::BetaAboveTwo(opts.beta.clone()));
    }

    let mut levels = Vec::new();
    let mut current = inst.clone();
    loop {
        let level = solve_level(current, opts)?;
        let stop = level.dead_paid.is_empty();
        let next = (!stop).then(|| level.inst.zero_penalties(&level.dead));
        levels.push(level);
        match next {
            Some(n) => current = n,
            None => break,
        }
    }

    let mut records = Vec::with_capacity(levels.len());
    let mut below: Option<Solution> = None;
    for level in levels.into_iter().rev() {
        let it = below.map(|s| Solution::priced(&level.inst, s.tree));
        let (mut chosen, mut best) = (Candidate::Gw, &level.gw);
        if level.st.total_cost < best.total_cost {
            (chosen, best) = (Candidate::St, &level.st);
        }
        if let Some(it) = &it {
            if it.total_cost < best.total_cost {
                (chosen, best) = (Candidate::It, it);
            }
        }
        let best = best.clone();
        records.push(LevelRecord {
            cost_gw: level.gw.total_cost,
            cost_st: level.st.total_cost,
            cost_it: it.map(|s| s.total_cost),
            dead: level.dead,
            dead_paid: level.dead_paid,
            chosen,
            chosen_cost: best.total_cost.clone(),
            steiner_fallback: level.fallback,
        });
        below = Some(best);
    }
    records.reverse();
    let solution = below.expect("at least one level");
    debug_assert!(solution.check(inst).is_ok());
    let trace = IterTrace {
        depth: records.len() - 1,
        levels: records,
        beta: opts.beta.clone(),
        solver_factor: opts.solver.declared_factor.clone(),
    };
    Ok((solution, trace))
}
