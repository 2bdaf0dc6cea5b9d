//! Exhaustive oracles, the coloring decomposition and its inequalities, and
//! the constraint system that turns them into an approximation factor.

mod constraints;
mod decompose;
mod oracle;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{gen_random, InstanceError, PcstInstance, Solution};
use crate::moat::{replay_check, run_gw, MoatRun, Violation};
use crate::rational::{int, Rational};
use crate::steiner::{SteinerError, SteinerSolver};

pub use constraints::{
    coefficients, feasible, feasible_weights, ln4, min_alpha, sign_mismatches, sign_table,
    ConstraintError, ConstraintSystem, MinAlpha, Sign, EXPECTED_SIGNS, ROWS, TERMS,
};
pub use decompose::{check_bounds, decompose, root_link_differential, DecompStats, BoundContext};
pub use oracle::{oracle_pcst, oracle_steiner_cost, OracleTooLarge, ORACLE_VERTEX_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("moat run and instance have different graphs")]
    FingerprintMismatch,
    #[error("optimal tree is invalid: {0}")]
    BadOptimum(String),
    #[error(transparent)]
    Oracle(#[from] OracleTooLarge),
    #[error(transparent)]
    Steiner(#[from] SteinerError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Seeded random instances with up to `max_n` vertices, integer weights and
/// penalties in `[0, 10]`.
pub fn corpus(max_n: usize, count: usize, seed: u64) -> Vec<PcstInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n.max(1));
            let p = rng.gen_range(0.15..0.75);
            gen_random(n, p, 10, 10, rng.gen()).expect("valid corpus parameters")
        })
        .collect()
}

/// Everything the bound suite learned about one instance.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub run: MoatRun,
    pub opt: Solution,
    pub stats: DecompStats,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub alpha: Option<Rational>,
    /// Adds 1 to `b2` before the inequalities run; a negative control.
    pub inject_corruption: bool,
}

/// Runs the moat replay checks, the decomposition invariants, every
/// per-instance inequality and the root-link differential on `inst`.
pub fn verify_instance(
    inst: &PcstInstance,
    beta: &Rational,
    solver: &SteinerSolver,
    opts: &VerifyOptions,
) -> Result<Certificate, CertifyError> {
    let scaled = inst.scale_penalties(beta)?;
    let run = run_gw(&scaled);
    let mut violations = replay_check(&run, &scaled);
    let opt = oracle_pcst(inst)?;
    let mut stats = decompose(inst, &run, &opt)?;
    violations.extend(stats.check_invariants());
    if opts.inject_corruption {
        stats.b2 += int(1);
    }
    violations.extend(check_bounds(&BoundContext {
        inst,
        run: &run,
        opt: &opt,
        stats: &stats,
        beta,
        solver,
        alpha: opts.alpha.as_ref(),
    })?);
    let targets: BTreeSet<_> = opt
        .tree
        .vertices
        .iter()
        .copied()
        .filter(|&v| v != inst.root())
        .collect();
    violations.extend(root_link_differential(&scaled, &targets)?);
    Ok(Certificate {
        run,
        opt,
        stats,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_star;
    use crate::rational::frac;
    use num_traits::Zero;

    #[test]
    fn corpus_is_seeded() {
        let a = corpus(8, 20, 42);
        assert_eq!(a, corpus(8, 20, 42));
        assert_ne!(a, corpus(8, 20, 43));
        assert!(a.iter().all(|i| i.vertex_count() <= 8));
    }

    #[test]
    fn heavy_scaling_decomposition() {
        let inst = gen_star(3, &frac(3, 5)).unwrap();
        let beta = frac(16, 5);
        let cert = verify_instance(&inst, &beta, &SteinerSolver::exact(), &VerifyOptions::default()).unwrap();
        let s = &cert.stats;
        assert!(s.r_a.is_zero() && s.r_c.is_zero() && s.r_d.is_zero());
        assert_eq!(s.r_b, frac(15, 8));
        assert_eq!((&s.b1, &s.b2), (&frac(15, 8), &int(0)));
        assert_eq!(s.r_bz, frac(15, 8));
        assert!(cert.violations.is_empty(), "{:?}", cert.violations);
    }

    #[test]
    fn corruption_trips_the_lower_bound() {
        let inst = gen_star(3, &frac(3, 5)).unwrap();
        let opts = VerifyOptions {
            inject_corruption: true,
            ..VerifyOptions::default()
        };
        let cert = verify_instance(&inst, &frac(16, 5), &SteinerSolver::exact(), &opts).unwrap();
        assert!(cert.violations.iter().any(|v| v.check == "optimum lower bound"));
    }

    #[test]
    fn fully_connected_case_has_empty_classes() {
        let inst = gen_star(3, &frac(3, 5)).unwrap();
        let beta = frac(313, 250);
        let cert = verify_instance(&inst, &beta, &SteinerSolver::exact(), &VerifyOptions::default()).unwrap();
        let s = &cert.stats;
        assert!(s.r_c.is_zero() && s.r_d.is_zero() && s.b1.is_zero() && s.b2.is_zero());
        let live_mass = cert.run.y(3) + cert.run.y(4);
        assert_eq!(s.r_a, live_mass);
        assert!(cert.violations.is_empty());
    }

    #[test]
    fn mismatched_graphs_are_rejected() {
        let a = gen_star(3, &frac(3, 5)).unwrap();
        let b = gen_star(4, &frac(1, 2)).unwrap();
        let run = run_gw(&b);
        let opt = oracle_pcst(&a).unwrap();
        assert_eq!(decompose(&a, &run, &opt), Err(CertifyError::FingerprintMismatch));
    }

    #[test]
    fn single_vertex_is_vacuous() {
        let inst = PcstInstance::new(1, 1, vec![], &Default::default()).unwrap();
        let cert = verify_instance(&inst, &frac(313, 250), &SteinerSolver::exact(), &VerifyOptions::default()).unwrap();
        assert!(cert.violations.is_empty());
    }

    #[test]
    fn small_corpus_passes_everything() {
        let beta = frac(313, 250);
        let opts = VerifyOptions {
            alpha: Some(frac(18, 10)),
            ..VerifyOptions::default()
        };
        for (i, inst) in corpus(7, 60, 5).iter().enumerate() {
            for solver in [SteinerSolver::exact(), SteinerSolver::mst2()] {
                let cert = verify_instance(inst, &beta, &solver, &opts).unwrap();
                assert!(cert.violations.is_empty(), "instance {i}: {:?}", cert.violations);
            }
        }
    }
}
