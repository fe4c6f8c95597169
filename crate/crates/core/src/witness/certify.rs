use std::fmt;

use num_traits::Signed;

use crate::error::Result;
use crate::graph::Vertex;
use crate::outcome::Outcome;
use crate::rational::{format, int, Rational};
use crate::status::{alternative_raw, check_outcome, EdgeKind};

use super::construct::{structure_witness, StructureWitness};
use super::explore::{explore, explore_forward};

/// Which rule chose the exploration start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartRule {
    /// Forward exploration from the endpoint of an unhappy matched edge whose
    /// balanced share would be negative.
    UnhappyEdge { u0: Vertex, partner: Vertex },
    /// Full exploration from an endpoint of an unstable unmatched edge.
    UnstableEdge { u0: Vertex, edge: (Vertex, Vertex) },
    /// Neither rule certified; full exploration from every vertex.
    Exhaustive { u0: Vertex },
}

impl fmt::Display for StartRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartRule::UnhappyEdge { u0, partner } => write!(f, "unhappy edge {u0}-{partner}, start {u0}"),
            StartRule::UnstableEdge { u0, edge } => write!(f, "unstable edge {}-{}, start {u0}", edge.0, edge.1),
            StartRule::Exhaustive { u0 } => write!(f, "exhaustive search, start {u0}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certification {
    Witness {
        witness: Box<StructureWitness>,
        start: StartRule,
    },
    /// Stable with no unhappy edges: nothing to certify.
    NothingToCertify,
    /// No trail produced a witness; the margins are reported.
    Inconclusive {
        max_instability: Rational,
        max_imbalance: Rational,
        n_eps: Rational,
        unhappy_edges: usize,
    },
}

impl Certification {
    pub fn witness(&self) -> Option<&StructureWitness> {
        match self {
            Certification::Witness { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certification::Witness { witness, start } => write!(
                f,
                "witness: {} via {start}, gap {}",
                witness.class.kind,
                witness.weight_gap.as_ref().map(format).unwrap_or_default()
            ),
            Certification::NothingToCertify => write!(f, "stable with no unhappy edges"),
            Certification::Inconclusive { max_instability, max_imbalance, n_eps, unhappy_edges } => write!(
                f,
                "inconclusive: max instability {}, max imbalance {}, n*eps {}, unhappy edges {unhappy_edges}",
                format(max_instability),
                format(max_imbalance),
                format(n_eps)
            ),
        }
    }
}

/// Searches for a trail whose witness beats `M`.
///
/// Unhappy matched edges are tried first, then unstable unmatched edges from
/// the most violated down, then, with `exhaustive`, every start vertex. The
/// first trail whose witness has an exactly positive gap is returned.
pub fn certify(outcome: &Outcome, exhaustive: bool) -> Result<Certification> {
    let report = check_outcome(outcome, &int(0), &int(0))?;
    let g = outcome.graph();
    let m = outcome.matching();
    let x = &outcome.allocation().0;

    for &(u, v) in &report.unhappy_edges {
        let au = alternative_raw(g, m, x, u);
        let av = alternative_raw(g, m, x, v);
        let (u0, partner) = if au < av { (u, v) } else { (v, u) };
        let w = structure_witness(outcome, explore_forward(outcome, u0)?)?;
        if w.is_certificate() {
            return Ok(Certification::Witness { witness: Box::new(w), start: StartRule::UnhappyEdge { u0, partner } });
        }
    }

    let mut unstable: Vec<(Rational, Vertex, Vertex)> = report
        .edges
        .iter()
        .filter(|s| s.kind == EdgeKind::UnmatchedUnstable)
        .map(|s| (-s.slack.clone().expect("unmatched edge slack"), s.u, s.v))
        .collect();
    unstable.sort_by(|a, b| b.0.cmp(&a.0));
    for (_, u, v) in &unstable {
        let mut starts: Vec<Vertex> = [*u, *v].into_iter().filter(|&z| m.is_covered(z)).collect();
        if starts.is_empty() {
            starts.push(*u);
        }
        for u0 in starts {
            let w = structure_witness(outcome, explore(outcome, u0)?)?;
            if w.is_certificate() {
                return Ok(Certification::Witness {
                    witness: Box::new(w),
                    start: StartRule::UnstableEdge { u0, edge: (*u, *v) },
                });
            }
        }
    }

    if exhaustive {
        for u0 in 0..g.vertex_count() {
            for trail in [explore(outcome, u0)?, explore_forward(outcome, u0)?] {
                let w = structure_witness(outcome, trail)?;
                if w.is_certificate() {
                    return Ok(Certification::Witness { witness: Box::new(w), start: StartRule::Exhaustive { u0 } });
                }
            }
        }
    }

    if report.unhappy_edges.is_empty() && report.stable {
        return Ok(Certification::NothingToCertify);
    }
    Ok(Certification::Inconclusive {
        max_instability: report.max_instability(),
        max_imbalance: report.max_imbalance.clone(),
        n_eps: report.n_eps_actual.clone(),
        unhappy_edges: report.unhappy_edges.len(),
    })
}

/// [`certify`] for an outcome that is only known to be an ε-fixed point.
///
/// Unless an unhappy edge is exactly saturated or some unmatched edge is
/// violated by more than `n · eps`, the answer is `Inconclusive` even if a
/// trail happens to certify.
pub fn certify_with_margin(outcome: &Outcome, eps: &Rational, exhaustive: bool) -> Result<Certification> {
    let report = check_outcome(outcome, &int(0), &int(0))?;
    let saturated = report.edges.iter().any(|e| e.kind == EdgeKind::MatchedUnhappySaturated);
    if !eps.is_positive() || saturated || margin_exceeds(outcome, eps)? {
        return certify(outcome, exhaustive);
    }
    if report.stable && report.unhappy_edges.is_empty() {
        return Ok(Certification::NothingToCertify);
    }
    Ok(Certification::Inconclusive {
        max_instability: report.max_instability(),
        max_imbalance: report.max_imbalance.clone(),
        n_eps: eps * int(outcome.graph().vertex_count() as i64),
        unhappy_edges: report.unhappy_edges.len(),
    })
}

/// True when some unmatched edge is violated by more than `n · eps`.
pub fn margin_exceeds(outcome: &Outcome, eps: &Rational) -> Result<bool> {
    let report = check_outcome(outcome, &int(0), &int(0))?;
    let n_eps = eps * int(outcome.graph().vertex_count() as i64);
    Ok(report.max_instability() > n_eps && report.max_instability().is_positive())
}
