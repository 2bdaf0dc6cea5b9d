//! Exhaustive optimisers for small instances.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::induced_mst;
use crate::instance::{PcstInstance, Solution, Tree, VertexId};
use crate::rational::Rational;

/// Largest vertex count the exhaustive oracles accept.
pub const ORACLE_VERTEX_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exhaustive oracle supports at most {limit} vertices, got {vertex_count}")]
pub struct OracleTooLarge {
    pub vertex_count: usize,
    pub limit: usize,
}

fn check_size(inst: &PcstInstance) -> Result<(), OracleTooLarge> {
    if inst.vertex_count() > ORACLE_VERTEX_LIMIT {
        return Err(OracleTooLarge {
            vertex_count: inst.vertex_count(),
            limit: ORACLE_VERTEX_LIMIT,
        });
    }
    Ok(())
}

/// Every vertex set that contains all of `required`, in mask order.
fn supersets<'a>(
    inst: &'a PcstInstance,
    required: &'a BTreeSet<VertexId>,
) -> impl Iterator<Item = BTreeSet<VertexId>> + 'a {
    let free: Vec<VertexId> = inst.vertices().filter(|v| !required.contains(v)).collect();
    (0u32..1 << free.len()).map(move |mask| {
        let mut set = required.clone();
        set.extend(
            free.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v),
        );
        set
    })
}

/// Exact optimum: the cheapest induced MST plus outside penalties over all
/// connected vertex sets containing the root. Ties go to the
/// lexicographically smallest vertex list.
pub fn oracle_pcst(inst: &PcstInstance) -> Result<Solution, OracleTooLarge> {
    check_size(inst)?;
    let required = BTreeSet::from([inst.root()]);
    let mut best: Option<(Solution, Vec<VertexId>)> = None;
    for set in supersets(inst, &required) {
        let Some(edges) = induced_mst(inst, &set) else {
            continue;
        };
        let sol = Solution::priced(inst, Tree::from_edges(inst, edges));
        let key: Vec<VertexId> = set.into_iter().collect();
        let better = match &best {
            None => true,
            Some((b, k)) => (&sol.total_cost, &key) < (&b.total_cost, k),
        };
        if better {
            best = Some((sol, key));
        }
    }
    Ok(best.expect("the root alone is always connected").0)
}

/// Exact minimum Steiner tree cost for `terminals` by superset enumeration.
pub fn oracle_steiner_cost(
    inst: &PcstInstance,
    terminals: &BTreeSet<VertexId>,
) -> Result<Rational, OracleTooLarge> {
    check_size(inst)?;
    Ok(supersets(inst, terminals)
        .filter_map(|set| induced_mst(inst, &set))
        .map(|t| inst.edge_cost(&t))
        .min()
        .expect("the full vertex set is connected"))
}
