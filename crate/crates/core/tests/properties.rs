use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use exbal::bp::{bp_run, bp_step, BpProblem, BpStatus};
use exbal::dynamics::{balance_edge, run, Recording, RunConfig, Scheduler};
use exbal::experiments::random_outcome;
use exbal::generate::{random_graph, random_maximal_matching, rng_for, GraphParams};
use exbal::instance::{parse_instance, Instance};
use exbal::rational::{format, int, parse, ratio, Rational};
use exbal::witness::{
    certify, classify_structure, explore_with, max_fractional_weight, structure_witness, verify_fractional_matching,
    StructureKind, TieBreak,
};
use exbal::{alternative, classify_matched_edge, EdgeKind, Outcome};

fn small() -> GraphParams {
    GraphParams { min_vertices: 3, max_vertices: 8, max_edges: 14, max_weight: 5 }
}

fn outcome_for(seed: u64) -> Outcome {
    let mut rng = rng_for(seed);
    let g = random_graph(&mut rng, &small());
    let m = random_maximal_matching(&g, &mut rng);
    random_outcome(g, m, seed)
}

/// Sorted vertex values and edge slacks, weighted 1/2, 1/4, ...
fn phi(o: &Outcome) -> Rational {
    let g = o.graph();
    let mut s: Vec<Rational> = o.allocation().values().to_vec();
    for e in g.edges() {
        s.push(o.x(e.u) + o.x(e.v) - int(e.w as i64));
    }
    s.sort();
    let mut scale = ratio(1, 2);
    let mut total = Rational::zero();
    for v in s {
        total += &scale * v;
        scale /= int(2);
    }
    total
}

fn two_pow(k: usize) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn balancing_one_edge_settles_it(seed in any::<u64>()) {
        let o = outcome_for(seed);
        for &id in o.matching().edge_ids() {
            let e = *o.graph().edge(id);
            let next = balance_edge(&o, e.u, e.v).unwrap();
            next.validate().unwrap();
            let kind = classify_matched_edge(&next, e.u, e.v).unwrap().kind;
            prop_assert!(
                matches!(kind, EdgeKind::MatchedBalanced | EdgeKind::MatchedQuasiBalancedNegativeSurplus | EdgeKind::MatchedUnhappySaturated),
                "{kind:?}"
            );
            // the split never depends on the edge's own endpoints' values
            prop_assert_eq!(alternative(&next, e.u).unwrap(), alternative(&o, e.u).unwrap());
        }
    }

    #[test]
    fn applied_steps_raise_phi(seed in any::<u64>()) {
        let o = outcome_for(seed);
        let n = o.graph().vertex_count();
        let m = o.graph().edge_count();
        let res = run(&o, &Scheduler::SeededRandom(seed), &RunConfig::new(int(0), 80)).unwrap();
        let mut cur = o.clone();
        let floor = two_pow(n + m);
        for s in &res.trajectory.steps {
            let mut x = cur.allocation().clone();
            x.0[s.u] = s.xu_after.clone();
            x.0[s.v] = s.xv_after.clone();
            let next = cur.with_allocation(x).unwrap();
            let gain = phi(&next) - phi(&cur);
            if s.skipped {
                prop_assert!(gain.is_zero());
            } else {
                prop_assert!(gain >= &s.eps_step / &floor, "step {}: gain {}", s.step, format(&gain));
            }
            prop_assert!(phi(&next) <= int(2 * o.graph().max_weight() as i64));
            cur = next;
        }
        prop_assert_eq!(&cur, &res.outcome);
    }

    #[test]
    fn trails_alternate_under_any_tie_break(seed in any::<u64>(), tie in any::<u64>()) {
        let o = outcome_for(seed);
        let g = o.graph();
        for u0 in 0..g.vertex_count() {
            for forward_only in [false, true] {
                let t = explore_with(&o, u0, forward_only, TieBreak::Seeded(tie)).unwrap();
                for (i, a, b) in t.steps() {
                    prop_assert!(g.edge_id(a, b).is_some(), "{a}-{b} is not an edge");
                    prop_assert_eq!(o.matching().partner(a) == Some(b), i.rem_euclid(2) == 0);
                }
                let class = classify_structure(&t, o.matching()).unwrap();
                if let Some(c) = &class.even_cycle {
                    prop_assert!(c.len() >= 4 && c.len() % 2 == 0);
                }
            }
        }
    }

    #[test]
    fn witnesses_are_sound(seed in any::<u64>()) {
        let o = outcome_for(seed);
        let g = o.graph();
        let (best, _) = max_fractional_weight(g).unwrap();
        let mw = int(o.matching().weight(g) as i64);
        for u0 in 0..g.vertex_count() {
            let t = explore_with(&o, u0, false, TieBreak::LowestId).unwrap();
            let w = structure_witness(&o, t).unwrap();
            if let Some(y) = &w.fractional_witness {
                prop_assert!(w.class.kind != StructureKind::Capped);
                let wy = verify_fractional_matching(g, y).unwrap();
                prop_assert!(wy > mw);
                prop_assert!(wy <= best);
                prop_assert_eq!(w.weight_gap.clone().unwrap(), wy - &mw);
            }
        }
    }

    #[test]
    fn certify_never_lies(seed in any::<u64>()) {
        let o = outcome_for(seed);
        let mw = int(o.matching().weight(o.graph()) as i64);
        if let Some(w) = certify(&o, true).unwrap().witness() {
            let y = w.fractional_witness.as_ref().unwrap();
            prop_assert!(verify_fractional_matching(o.graph(), y).unwrap() > mw);
        }
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let inst = Instance::from_outcome(&outcome_for(seed));
        let back = parse_instance(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn converged_messages_are_fixed(seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let g = random_graph(&mut rng, &small());
        let p = BpProblem::perturbed(&g, &ratio(1, 1024));
        // id-linear perturbation still ties matchings with equal weight and id sum
        let res = match bp_run(&p, 3_000) {
            Err(exbal::Error::AmbiguousOptimum(_)) => return Err(TestCaseError::reject("tied optimum")),
            other => other.unwrap(),
        };
        if let BpStatus::Converged { .. } = res.status {
            let again = bp_step(&res.state, &p);
            prop_assert_eq!(again.values(), res.state.values());
            prop_assert!(res.state.max_value() <= p.max_weight());
        }
        for v in res.state.values() {
            prop_assert!(!v.is_negative());
        }
    }

    #[test]
    fn rationals_print_and_parse(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = ratio(p, q);
        prop_assert_eq!(parse(&format(&r)).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn report_flags_are_consistent(seed in any::<u64>(), e in 0i64..64, d in 0i64..64) {
        let o = outcome_for(seed);
        let eps = ratio(e, 16);
        let delta = ratio(d, 16);
        let r = exbal::check_outcome(&o, &eps, &delta).unwrap();
        prop_assert_eq!(r.balanced, r.stable && r.quasi_balanced);
        let wider = exbal::check_outcome(&o, &(&eps + int(1)), &(&delta + int(1))).unwrap();
        prop_assert!(!r.eps_quasi_balanced || wider.eps_quasi_balanced);
        prop_assert!(!r.delta_stable || wider.delta_stable);
        for s in &r.edges {
            if s.kind.is_matched() {
                prop_assert_eq!(s.kind, classify_matched_edge(&o, s.u, s.v).unwrap().kind);
            }
        }
    }

    #[test]
    fn quasi_balance_bounds_instability_on_maximum_matchings(seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let g = random_graph(&mut rng, &small());
        let m = exbal::witness::max_weight_matching(&g).unwrap();
        prop_assume!(exbal::witness::has_balanced_outcome(&g, &m).unwrap());
        let n = g.vertex_count() as i64;
        let o = random_outcome(g, m, seed);
        let first = exbal::check_outcome(&o, &int(0), &int(0)).unwrap();
        prop_assume!(first.unhappy_edges.is_empty());
        let eps = first.max_imbalance.clone();
        let r = exbal::check_outcome(&o, &eps, &(&eps * int(n))).unwrap();
        prop_assert!(r.eps_quasi_balanced);
        prop_assert!(r.delta_stable, "instability {} > n*eps {}", format(&r.max_instability()), format(&(&eps * int(n))));
    }
}

#[test]
fn long_runs_stay_valid() {
    for seed in 0..10 {
        let o = outcome_for(seed);
        let res =
            run(&o, &Scheduler::RoundRobin, &RunConfig::new(parse("1e-9").unwrap(), 100_000).recording(Recording::Off))
                .unwrap();
        res.outcome.validate().unwrap();
    }
}
