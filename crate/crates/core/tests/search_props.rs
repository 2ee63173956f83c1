//! Planner and heuristic properties on small random instances.

use bpp_core::benchmarks::{gen_countdown, Instance};
use bpp_core::heuristic::{estimate, GraphKind};
use bpp_core::kb::entails;
use bpp_core::{build_graph, oracle_plan, plan, validate_plan, GraphOutcome, OracleConfig, Outcome, PlannerConfig};
use proptest::prelude::*;

fn countdown() -> impl Strategy<Value = Instance> {
    (proptest::collection::vec(2i64..10, 1..4), 2i64..120, 0usize..3)
        .prop_map(|(values, target, bound)| gen_countdown(&values, target, bound))
}

fn configs(n: usize) -> Vec<PlannerConfig> {
    vec![
        PlannerConfig::new(n),
        PlannerConfig { heuristic_on: false, ..PlannerConfig::new(n) },
        PlannerConfig { duplicate_detection: true, ..PlannerConfig::new(n) },
        PlannerConfig { dead_end_prune: true, ..PlannerConfig::new(n) },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn plans_validate_and_agree_with_oracle(inst in countdown()) {
        let th = inst.initial_theory().unwrap();
        let n = inst.problem.bound;
        let goal = &inst.problem.goal;
        let truth = oracle_plan(&inst.domain, &th, goal, &OracleConfig::new(n)).unwrap();
        if let Some(p) = truth.plan() {
            prop_assert!(validate_plan(&inst.domain, &th, goal, p).is_ok());
        }
        for cfg in configs(n) {
            let r = plan(&inst.domain, &th, goal, &cfg).unwrap();
            match (&r.outcome, truth.plan()) {
                (Outcome::Plan(p), Some(best)) => {
                    prop_assert!(validate_plan(&inst.domain, &th, goal, p).is_ok());
                    prop_assert!(p.len() >= best.len() && p.len() <= n);
                }
                (Outcome::NoPlanWithinBound, None) => {}
                (got, want) => prop_assert!(false, "{cfg:?}: {got:?} vs oracle {want:?}"),
            }
        }
    }

    #[test]
    fn uniform_cost_pops_are_monotone(inst in countdown()) {
        let th = inst.initial_theory().unwrap();
        let cfg = PlannerConfig { heuristic_on: false, record_pops: true, ..PlannerConfig::new(inst.problem.bound) };
        let r = plan(&inst.domain, &th, &inst.problem.goal, &cfg).unwrap();
        prop_assert!(r.stats.pops.windows(2).all(|w| w[0] <= w[1]));
    }

    // Estimated states are children, so their situation length is at least 1.
    #[test]
    fn zero_estimate_iff_goal_known(inst in countdown(), d in 0usize..3, l in 1usize..4) {
        let th = inst.initial_theory().unwrap();
        let e = estimate(&inst.domain, &inst.problem.goal, d, l, &th).unwrap();
        prop_assert_eq!(e.value == 0, entails(&th, &inst.problem.goal).unwrap());
    }

    #[test]
    fn relaxed_layers_grow(inst in countdown(), d in 0usize..3) {
        let th = inst.initial_theory().unwrap();
        let out = build_graph(&inst.domain, &inst.problem.goal, d, &th).unwrap();
        let g = out.graph();
        prop_assert!(g.layers.len() <= d + 1);
        let mut prev = g.state_at(0);
        for k in 1..=g.layers.len() {
            let next = g.state_at(k);
            for (f, _) in th.signature().iter() {
                prop_assert!(prev.k_true(f).is_subset(next.k_true(f)));
            }
            prop_assert!(!g.layers[k - 1].new_effects.is_empty() || g.layers[k - 1].new_actions.is_empty());
            prev = next;
        }
        prop_assert_eq!(&prev, g.last_state());
    }

    #[test]
    fn penalties_dominate(inst in countdown(), d in 0usize..3, l in 0usize..3) {
        let th = inst.initial_theory().unwrap();
        let goal = &inst.problem.goal;
        let e = estimate(&inst.domain, goal, d, l, &th).unwrap();
        match e.kind {
            GraphKind::Fixpoint => prop_assert_eq!(e.value, l + d + 1),
            GraphKind::DepthExceeded => prop_assert_eq!(e.value, l + d),
            GraphKind::Reached => {
                let out = build_graph(&inst.domain, goal, d, &th).unwrap();
                let actions: usize = out.graph().layers.iter().map(|x| x.new_actions.len()).sum();
                prop_assert!(e.value <= actions);
            }
        }
    }

    #[test]
    fn fixpoint_from_initial_state_means_unsolvable(inst in countdown()) {
        let th = inst.initial_theory().unwrap();
        let n = inst.problem.bound;
        let out = build_graph(&inst.domain, &inst.problem.goal, n, &th).unwrap();
        if matches!(out, GraphOutcome::Fixpoint { .. }) {
            let r = oracle_plan(&inst.domain, &th, &inst.problem.goal, &OracleConfig::new(n)).unwrap();
            prop_assert!(r.plan().is_none());
        }
    }
}
