use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use pcst::certify::{root_link_differential, oracle_pcst};
use pcst::instance::{gen_random, parse_instance, serialize_instance};
use pcst::moat::replay_check;
use pcst::rational::{frac, int, Rational};
use pcst::{ipcst, run_gw, IterOptions, PcstInstance, SteinerSolver};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = PcstInstance> {
    (1usize..=8, 0.1f64..0.8, 0u32..=10, 0u32..=10, any::<u64>())
        .prop_map(|(n, p, w, pen, seed)| gen_random(n, p, w, pen, seed).unwrap())
}

fn beta() -> impl Strategy<Value = Rational> {
    (1i64..=2000).prop_map(|k| frac(k, 1000))
}

/// Small beta inflates penalties until every candidate buys an edge that OPT
/// skips, so the factor-two bound needs beta >= 1.
#[test]
fn factor_two_needs_beta_at_least_one() {
    let penalties = BTreeMap::from([(1, int(0)), (3, int(1))]);
    let inst = PcstInstance::new(3, 2, vec![(1, 2, int(1)), (2, 3, int(3))], &penalties).unwrap();
    let opt = oracle_pcst(&inst).unwrap().total_cost;
    assert_eq!(opt, int(1));
    let small = IterOptions { beta: frac(1, 1000), ..IterOptions::default() };
    assert_eq!(ipcst(&inst, &small).unwrap().0.total_cost, int(3));
    assert_eq!(ipcst(&inst, &IterOptions::default()).unwrap().0.total_cost, int(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn file_format_round_trips(inst in instance()) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn moat_runs_replay_cleanly(inst in instance(), beta in beta()) {
        let scaled = inst.scale_penalties(&beta).unwrap();
        let run = run_gw(&scaled);
        let violations = replay_check(&run, &scaled);
        prop_assert!(violations.is_empty(), "{:?}", violations);
        prop_assert!(run.tree.tree.contains(inst.root()));
        for v in inst.vertices().filter(|v| !run.is_dead(*v)) {
            prop_assert!(run.tree.tree.contains(v), "live vertex {} pruned", v);
        }
    }

    #[test]
    fn solver_is_deterministic_and_bounded(inst in instance(), beta in beta(), mst2 in any::<bool>()) {
        let opts = IterOptions {
            beta,
            solver: if mst2 { SteinerSolver::mst2() } else { SteinerSolver::exact() },
            allow_beta_above_two: false,
        };
        let (sol, trace) = ipcst(&inst, &opts).unwrap();
        let again = ipcst(&inst, &opts).unwrap();
        prop_assert_eq!(&sol, &again.0);
        prop_assert_eq!(&trace, &again.1);
        prop_assert!(trace.check_invariants(&inst).is_empty());
        sol.check(&inst).unwrap();
        let opt = oracle_pcst(&inst).unwrap().total_cost;
        prop_assert!(sol.total_cost >= opt);
        if opts.beta >= int(1) {
            prop_assert!(sol.total_cost <= int(2) * &opt, "{} > 2 * {}", sol.total_cost, opt);
        }
    }

    #[test]
    fn root_links_to_the_optimum_only_shrink_duals(inst in instance(), beta in beta()) {
        let scaled = inst.scale_penalties(&beta).unwrap();
        let opt = oracle_pcst(&inst).unwrap();
        let targets: BTreeSet<_> = opt.tree.vertices.iter().copied().filter(|&v| v != inst.root()).collect();
        prop_assert!(root_link_differential(&scaled, &targets).unwrap().is_empty());

        // Direct comparison of the two runs.
        let base = run_gw(&scaled);
        let linked = run_gw(&scaled.augment_with_root_edges(&targets).unwrap());
        for v in inst.non_root_vertices() {
            prop_assert!(linked.y(v) <= base.y(v), "y'({}) > y({})", v, v);
        }
        for &u in &targets {
            prop_assert!(linked.y(u).is_zero());
        }
        prop_assert!(linked.dead_vertices.is_subset(&base.dead_vertices));
    }
}
