use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{PcstInstance, VertexId};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("star needs n >= 2 leaves, got {0}")]
    StarTooSmall(usize),
    #[error("epsilon {epsilon} must exceed 1/(n-1) = {bound}")]
    EpsilonTooSmall { epsilon: Rational, bound: Rational },
    #[error("random instance needs n >= 1")]
    NoVertices,
    #[error("edge probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
}

/// Star with `n` unit-weight spokes where greedy moat growing under heavy
/// penalty scaling pays twice the optimum.
///
/// Vertex 1 is the root leaf, vertex 2 the zero-penalty center, vertices
/// `3..=n+1` the remaining leaves with penalty `2(1 + 1/(n-1))`. The
/// `epsilon` parameter is the scaling slack `beta = 2(1 + epsilon)` the
/// family is meant for; it must exceed `1/(n-1)`.
pub fn gen_star(n: usize, epsilon: &Rational) -> Result<PcstInstance, GenerateError> {
    if n < 2 {
        return Err(GenerateError::StarTooSmall(n));
    }
    let bound = Rational::new(1.into(), ((n - 1) as i64).into());
    if epsilon <= &bound || !epsilon.is_positive() {
        return Err(GenerateError::EpsilonTooSmall {
            epsilon: epsilon.clone(),
            bound,
        });
    }
    let leaf_penalty = int(2) * (int(1) + &bound);
    let center = 2;
    let mut edges = vec![(1, center, int(1))];
    let mut penalties = BTreeMap::new();
    for leaf in 3..=n + 1 {
        edges.push((center, leaf, int(1)));
        penalties.insert(leaf, leaf_penalty.clone());
    }
    Ok(PcstInstance::new(n + 1, 1, edges, &penalties).expect("star instance is valid"))
}

/// Connected random instance: a random spanning tree plus independent extra
/// edges. Weights and penalties are integers in `[0, max]`; deterministic in
/// `seed`.
pub fn gen_random(
    n: usize,
    edge_probability: f64,
    max_weight: u32,
    max_penalty: u32,
    seed: u64,
) -> Result<PcstInstance, GenerateError> {
    if n == 0 {
        return Err(GenerateError::NoVertices);
    }
    if !(0.0..=1.0).contains(&edge_probability) {
        return Err(GenerateError::BadProbability(edge_probability));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<VertexId> = (1..=n).collect();
    order.shuffle(&mut rng);
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    for u in 1..=n {
        for v in u + 1..=n {
            if !pairs.contains(&(u, v)) && rng.gen_bool(edge_probability) {
                pairs.insert((u, v));
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(u, v)| (u, v, int(i64::from(rng.gen_range(0..=max_weight)))))
        .collect();
    let root = rng.gen_range(1..=n);
    let penalties = (1..=n)
        .filter(|&v| v != root)
        .map(|v| (v, int(i64::from(rng.gen_range(0..=max_penalty)))))
        .collect();
    Ok(PcstInstance::new(n, root, edges, &penalties).expect("generated instance is valid"))
}
