//! Per-instance property checks shared by the batch runner and the tests.
//!
//! Each check draws its instance from a seed, runs one pipeline, and reports
//! the measured quantities together with a list of failures (empty on pass).

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::bp::{bp_run, BpProblem};
use crate::dynamics::{phi_upper_bound, refine_to_balanced, run, Recording, RunConfig, Scheduler, StopReason};
use crate::error::Result;
use crate::generate::{instance_with_verdict, random_graph, rng_for, GraphParams, MatchingRule};
use crate::graph::WeightedGraph;
use crate::outcome::{Allocation, Matching, Outcome};
use crate::rational::{format, int, parse, ratio, Rational};
use crate::status::check_outcome;
use crate::witness::{
    certify, check_fixed_point_trail, check_quasi_balanced_trail, explore, has_balanced_outcome, max_fractional_weight,
    max_fractional_with_weights, structure_witness, verify_fractional_matching, Certification, StartRule,
    StructureKind, StructureWitness,
};

/// Bits of the dyadic grid used for random initial allocations.
pub const ALLOCATION_BITS: u32 = 6;

const SALT_ALLOCATION: u64 = 0x9e37_79b9_7f4a_7c15;

fn rule_for(seed: u64) -> MatchingRule {
    if seed.is_multiple_of(2) {
        MatchingRule::MaxWeight
    } else {
        MatchingRule::RandomMaximal
    }
}

pub fn random_outcome(graph: WeightedGraph, matching: Matching, seed: u64) -> Outcome {
    let mut rng = rng_for(seed ^ SALT_ALLOCATION);
    let x = Allocation::random(&graph, &matching, &mut rng, ALLOCATION_BITS);
    Outcome::new(graph, matching, x).expect("random allocation is valid")
}

/// Largest `|x_i - target_i|`.
pub fn sup_distance(x: &[Rational], target: &[Rational]) -> Rational {
    x.iter().zip(target).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rational::zero)
}

#[derive(Debug, Clone)]
pub struct PotentialAudit {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub steps: u64,
    pub applied: u64,
    pub failures: Vec<String>,
}

/// Runs `max_steps` exact steps (no early stop) under a seeded random
/// scheduler and audits every potential gain.
pub fn potential_audit(seed: u64, params: &GraphParams, max_steps: u64) -> Result<PotentialAudit> {
    let mut rng = rng_for(seed);
    let g = random_graph(&mut rng, params);
    let m = crate::generate::random_maximal_matching(&g, &mut rng);
    let bound = phi_upper_bound(&g);
    let o = random_outcome(g, m, seed);
    let res = run(&o, &Scheduler::SeededRandom(seed), &RunConfig::new(int(0), max_steps).recording(Recording::Full))?;
    let failures =
        res.trajectory.audit(&bound).into_iter().map(|v| format!("step {}: {}", v.step, v.message)).collect();
    Ok(PotentialAudit {
        seed,
        n: o.graph().vertex_count(),
        m: o.graph().edge_count(),
        steps: res.steps,
        applied: res.applied,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct FixedPointCheck {
    pub seed: u64,
    pub n: usize,
    pub steps: u64,
    pub max_imbalance: Rational,
    pub min_slack: Option<Rational>,
    pub outcome: Outcome,
    pub failures: Vec<String>,
}

/// Instance with a balanced outcome: run to an ε-fixed point and check
/// imbalance `≤ ε` and unmatched slack `≥ -nε`.
pub fn fixed_point_check(
    seed: u64,
    params: &GraphParams,
    stop_eps: &Rational,
    max_steps: u64,
) -> Result<FixedPointCheck> {
    let (g, m) = instance_with_verdict(seed, params, rule_for(seed), true)?;
    let n = g.vertex_count();
    let o = random_outcome(g, m, seed);
    let res = run(&o, &Scheduler::RoundRobin, &RunConfig::new(stop_eps.clone(), max_steps).recording(Recording::Off))?;
    let report = check_outcome(&res.outcome, stop_eps, &(stop_eps * int(n as i64)))?;
    let mut failures = Vec::new();
    if !matches!(res.stop, StopReason::EpsFixedPoint | StopReason::NoMatchedEdges) {
        failures.push(format!("stopped: {}", res.stop));
    }
    if !report.eps_quasi_balanced {
        failures.push(format!("imbalance {} > eps", format(&report.max_imbalance)));
    }
    if !report.delta_stable {
        failures.push(format!("slack {} < -n*eps", report.min_slack.as_ref().map(format).unwrap_or_default()));
    }
    Ok(FixedPointCheck {
        seed,
        n,
        steps: res.steps,
        max_imbalance: report.max_imbalance,
        min_slack: report.min_slack,
        outcome: res.outcome,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityCheck {
    pub seed: u64,
    pub eps: Rational,
    /// Measured imbalance of the perturbed allocation (`≤ eps`).
    pub measured_eps: Rational,
    pub instability: Rational,
    pub exact_balanced: bool,
    pub failures: Vec<String>,
}

/// Shifts each matched split by at most `eps/4`, clamped to the edge.
pub fn perturb_within<R: Rng + ?Sized>(outcome: &Outcome, eps: &Rational, rng: &mut R) -> Outcome {
    let g = outcome.graph();
    let mut x = outcome.allocation().0.clone();
    if eps.is_zero() {
        return outcome.clone();
    }
    let quarter = eps / int(4);
    for &id in outcome.matching().edge_ids() {
        let e = g.edge(id);
        let w = g.weight_q(id);
        let t = &quarter * ratio(rng.gen_range(-1000..=1000), 1000);
        let mut xu = &x[e.u] + t;
        if xu.is_negative() {
            xu = Rational::zero();
        }
        if xu > w {
            xu = w.clone();
        }
        x[e.v] = &w - &xu;
        x[e.u] = xu;
    }
    outcome.with_allocation(Allocation(x)).expect("clamped perturbation is valid")
}

/// Approximate balance implies approximate stability: starting from the
/// balanced outcome of [`fixed_point_check`]'s instance, perturb within `eps`
/// and check `δ ≤ n·ε'` for the measured imbalance `ε' ≤ eps`. Also checks
/// the trail bound from the most violated edge.
pub fn stability_check(seed: u64, params: &GraphParams, eps: &Rational) -> Result<StabilityCheck> {
    let fp = fixed_point_check(seed, params, &parse("1e-9")?, 1_000_000)?;
    let exact = refine_to_balanced(&fp.outcome, &parse("1e-6")?);
    let exact_balanced = exact.is_some();
    let base = exact.unwrap_or(fp.outcome);
    let mut rng = rng_for(seed.wrapping_mul(31).wrapping_add(7));
    let o = perturb_within(&base, eps, &mut rng);
    let n = int(o.graph().vertex_count() as i64);
    let report = check_outcome(&o, eps, &int(0))?;
    let measured = report.max_imbalance.clone();
    let delta = report.max_instability();
    let mut failures = Vec::new();
    if eps.is_zero() && !exact_balanced {
        failures.push("no exact balanced outcome recovered".into());
    }
    if &measured > eps && exact_balanced {
        failures.push(format!("perturbation left imbalance {} > eps", format(&measured)));
    }
    if delta > &n * &measured {
        failures.push(format!("instability {} > n*eps' = {}", format(&delta), format(&(&n * &measured))));
    }
    if let Some((u, v)) = report.worst_slack_edge.filter(|_| delta.is_positive()) {
        let u0 = if o.matching().is_covered(u) { u } else { v };
        let trail = explore(&o, u0)?;
        for viol in check_quasi_balanced_trail(&o, &trail, &measured, &delta) {
            failures.push(format!("trail bound at step {}: {}", viol.position, viol.detail));
        }
    }
    Ok(StabilityCheck { seed, eps: eps.clone(), measured_eps: measured, instability: delta, exact_balanced, failures })
}

#[derive(Debug, Clone)]
pub struct WitnessCheck {
    pub seed: u64,
    /// The run reached an exact fixed point.
    pub exact: bool,
    /// Instability or saturation exceeds `n·ε` of the stopping rule.
    pub margin_ok: bool,
    pub start: Option<StartRule>,
    pub class: Option<StructureKind>,
    pub gap: Option<Rational>,
    pub fixed_point_trail_checked: bool,
    /// The fixed point and the certificate found on it.
    pub certified: Option<(Outcome, StructureWitness)>,
    pub failures: Vec<String>,
}

/// Instance without a balanced outcome: run to a fixed point, certify, and
/// cross-check the witness against the oracle.
///
/// Completeness is only promised for maximum matchings; with
/// [`MatchingRule::RandomMaximal`] a fixed point can leave every trail capped.
pub fn witness_check(
    seed: u64,
    params: &GraphParams,
    rule: MatchingRule,
    exact_steps: u64,
    eps: &Rational,
) -> Result<WitnessCheck> {
    let (g, m) = instance_with_verdict(seed, params, rule, false)?;
    let (best, _) = max_fractional_weight(&g)?;
    let o = random_outcome(g, m, seed);
    let mut res = run(&o, &Scheduler::RoundRobin, &RunConfig::new(int(0), exact_steps).recording(Recording::Off))?;
    let exact = res.stop == StopReason::EpsFixedPoint;
    if !exact {
        res = run(
            &res.outcome,
            &Scheduler::RoundRobin,
            &RunConfig::new(eps.clone(), 1_000_000).recording(Recording::Off),
        )?;
    }
    let fixed = res.outcome;
    let report = check_outcome(&fixed, &int(0), &int(0))?;
    let n_eps = if exact { int(0) } else { eps * int(fixed.graph().vertex_count() as i64) };
    let saturated = report.edges.iter().any(|e| e.kind == crate::status::EdgeKind::MatchedUnhappySaturated);
    let margin_ok = saturated || report.max_instability() > n_eps;

    let mut out = WitnessCheck {
        seed,
        exact,
        margin_ok,
        start: None,
        class: None,
        gap: None,
        fixed_point_trail_checked: false,
        certified: None,
        failures: Vec::new(),
    };
    if res.stop != StopReason::EpsFixedPoint {
        out.failures.push(format!("stopped: {}", res.stop));
    }
    let cert = certify(&fixed, false)?;
    let (w, start) = match &cert {
        Certification::Witness { witness, start } => (witness.as_ref(), *start),
        other => {
            out.failures.push(other.to_string());
            return Ok(out);
        }
    };
    out.start = Some(start);
    out.class = Some(w.class.kind);
    out.gap = w.weight_gap.clone();
    out.failures.extend(audit_witness(&fixed, w, Some(&best)));

    if exact && rule == MatchingRule::MaxWeight {
        if let StartRule::UnhappyEdge { u0, partner } = start {
            if fixed.x(u0).is_zero()
                && fixed.x(partner) == &fixed.graph().weight_q(fixed.graph().edge_id(u0, partner).expect("matched"))
            {
                out.fixed_point_trail_checked = true;
                for v in check_fixed_point_trail(&fixed, &w.trail)? {
                    out.failures.push(format!("trail rule {:?} at position {}: {}", v.rule, v.position, v.detail));
                }
            }
        }
    }
    out.certified = Some((fixed.clone(), w.clone()));
    Ok(out)
}

/// Soundness checks on a witness: non-capped, verified degrees, exact
/// positive gap, and at most the oracle optimum when given.
pub fn audit_witness(outcome: &Outcome, w: &StructureWitness, oracle_max: Option<&Rational>) -> Vec<String> {
    let mut f = Vec::new();
    if w.class.kind == StructureKind::Capped {
        f.push("capped structure".into());
    }
    let Some(y) = &w.fractional_witness else {
        f.push("no fractional witness".into());
        return f;
    };
    let mw = int(outcome.matching().weight(outcome.graph()) as i64);
    match verify_fractional_matching(outcome.graph(), y) {
        Err(e) => f.push(format!("witness invalid: {e}")),
        Ok(wy) => {
            if wy <= mw {
                f.push(format!("witness weight {} not above matching weight {}", format(&wy), format(&mw)));
            }
            if w.weight_gap.as_ref() != Some(&(&wy - &mw)) {
                f.push("reported gap differs from recomputed gap".into());
            }
            if let Some(best) = oracle_max {
                if &wy > best {
                    f.push(format!("witness weight {} above oracle maximum {}", format(&wy), format(best)));
                }
            }
        }
    }
    f
}

#[derive(Debug, Clone)]
pub struct PipelineCheck {
    pub seed: u64,
    pub draws: u32,
    pub bp_iterations: u64,
    pub failures: Vec<String>,
}

/// Draws graphs from `seed` until the perturbed oracle optimum is integral
/// and unique, then runs BP, checks the extracted matching, and balances it.
pub fn pipeline_check(
    seed: u64,
    params: &GraphParams,
    eta: &Rational,
    max_iters: u64,
    stop_eps: &Rational,
) -> Result<PipelineCheck> {
    let mut rng = rng_for(seed);
    let mut draws = 0;
    let g = loop {
        draws += 1;
        let g = random_graph(&mut rng, params);
        let p = BpProblem::perturbed(&g, eta);
        let opt = max_fractional_with_weights(&g, p.weights())?;
        if opt.maximizer.is_integral() && opt.is_unique() {
            break g;
        }
        if draws > 10_000 {
            return Err(crate::Error::Input(format!("seed {seed}: no integral unique optimum found")));
        }
    };
    let mut failures = Vec::new();
    let problem = BpProblem::perturbed(&g, eta);
    let res = bp_run(&problem, max_iters)?;
    let bp_iterations = res.state.t;
    if res.state.max_value() > problem.max_weight() {
        failures.push("message above max weight".into());
    }
    let Some(m) = res.matching else {
        failures.push(format!("bp {}", res.status));
        return Ok(PipelineCheck { seed, draws, bp_iterations, failures });
    };
    if !has_balanced_outcome(&g, &m)? {
        failures.push("extracted matching admits no balanced outcome".into());
    }
    let n = g.vertex_count();
    let x = Allocation::equal_split(&g, &m);
    let o = Outcome::new(g, m, x)?;
    let run_res =
        run(&o, &Scheduler::RoundRobin, &RunConfig::new(stop_eps.clone(), 1_000_000).recording(Recording::Off))?;
    let report = check_outcome(&run_res.outcome, stop_eps, &(stop_eps * int(n as i64)))?;
    if !(report.eps_quasi_balanced && report.delta_stable) {
        failures.push(format!(
            "dynamics ended at imbalance {} / instability {}",
            format(&report.max_imbalance),
            format(&report.max_instability())
        ));
    }
    Ok(PipelineCheck { seed, draws, bp_iterations, failures })
}

/// Witnesses built from trails whose unmatched edges are all strictly unstable.
#[derive(Debug, Clone, Default)]
pub struct StructureScan {
    pub witnessed: BTreeMap<&'static str, usize>,
    pub failures: Vec<String>,
}

/// Unmatched edges that the witness for `w` relies on.
pub fn witness_unmatched_edges(outcome: &Outcome, w: &StructureWitness) -> Vec<(usize, usize)> {
    let m = outcome.matching();
    let pairs: Vec<(usize, usize)> = match &w.class.even_cycle {
        Some(c) => (0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])).collect(),
        None => w.trail.steps().map(|(_, a, b)| (a, b)).collect(),
    };
    pairs.into_iter().filter(|&(a, b)| m.partner(a) != Some(b)).collect()
}

/// Explores from every vertex of a random outcome; where every unmatched edge
/// used by the structure is strictly unstable, the witness must beat `M`.
pub fn structure_scan(seed: u64, params: &GraphParams, scan: &mut StructureScan) -> Result<()> {
    let mut rng = rng_for(seed);
    let g = random_graph(&mut rng, params);
    let m = crate::generate::random_maximal_matching(&g, &mut rng);
    let o = random_outcome(g, m, seed);
    let (best, _) = max_fractional_weight(o.graph())?;
    for u0 in 0..o.graph().vertex_count() {
        let w = structure_witness(&o, explore(&o, u0)?)?;
        if w.class.kind == StructureKind::Capped || w.trail.steps().next().is_none() {
            continue;
        }
        let strict = witness_unmatched_edges(&o, &w).iter().all(|&(a, b)| {
            let id = o.graph().edge_id(a, b).expect("trail edge");
            o.x(a) + o.x(b) < o.graph().weight_q(id)
        });
        if !strict {
            continue;
        }
        *scan.witnessed.entry(w.class.kind.name()).or_default() += 1;
        for f in audit_witness(&o, &w, Some(&best)) {
            scan.failures.push(format!("seed {seed} start {u0} ({}): {f}", w.class.kind));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_on_a_few_seeds() {
        let p = GraphParams::default();
        for seed in 0..3 {
            assert!(potential_audit(seed, &p, 50).unwrap().failures.is_empty());
            let fp = fixed_point_check(seed, &p, &parse("1e-6").unwrap(), 100_000).unwrap();
            assert!(fp.failures.is_empty(), "{:?}", fp.failures);
        }
    }

    #[test]
    fn perturbation_stays_within_quarter() {
        let g = WeightedGraph::new(2, [(0, 1, 4)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(2), int(2)])).unwrap();
        let mut rng = rng_for(0);
        for _ in 0..20 {
            let p = perturb_within(&o, &ratio(1, 10), &mut rng);
            assert!((p.x(0) - int(2)).abs() <= ratio(1, 40));
        }
    }

    #[test]
    fn sup_distance_is_max_norm() {
        assert_eq!(sup_distance(&[int(1), int(3)], &[int(2), int(0)]), int(3));
    }
}
