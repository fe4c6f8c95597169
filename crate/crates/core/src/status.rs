//! Per-vertex and per-edge quantities of an outcome: alternatives, surplus,
//! edge classification, and the stability/balance report.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex, WeightedGraph};
use crate::outcome::{Matching, Outcome};
use crate::rational::{format, half, int, Rational};

/// `α_u` computed against a raw allocation slice.
pub(crate) fn alternative_raw(graph: &WeightedGraph, matching: &Matching, x: &[Rational], u: Vertex) -> Rational {
    let mut best = Rational::zero();
    for &(v, id) in graph.neighbors(u) {
        if matching.partner(u) == Some(v) {
            continue;
        }
        let cand = graph.weight_q(id) - &x[v];
        if cand > best {
            best = cand;
        }
    }
    best
}

/// All neighbors attaining `α_u > 0`, ascending by id.
pub(crate) fn alternative_witnesses_raw(
    graph: &WeightedGraph,
    matching: &Matching,
    x: &[Rational],
    u: Vertex,
) -> Vec<Vertex> {
    let alpha = alternative_raw(graph, matching, x, u);
    if alpha.is_zero() {
        return Vec::new();
    }
    graph
        .neighbors(u)
        .iter()
        .filter(|&&(v, id)| matching.partner(u) != Some(v) && graph.weight_q(id) - &x[v] == alpha)
        .map(|&(v, _)| v)
        .collect()
}

/// The alternative `α_u = max{0, max over unmatched neighbors v of (w_uv - x_v)}`.
pub fn alternative(outcome: &Outcome, u: Vertex) -> Result<Rational> {
    outcome.graph().check_vertex(u)?;
    Ok(alternative_raw(outcome.graph(), outcome.matching(), &outcome.allocation().0, u))
}

fn matched_edge(outcome: &Outcome, u: Vertex, v: Vertex) -> Result<EdgeId> {
    let id = outcome.graph().require_edge(u, v)?;
    if outcome.matching().partner(u) != Some(v) {
        return Err(Error::Input(format!("{u}-{v} is not in the matching")));
    }
    Ok(id)
}

/// `s_uv = w_uv - α_u - α_v` for a matched edge. May be negative.
pub fn surplus(outcome: &Outcome, u: Vertex, v: Vertex) -> Result<Rational> {
    let id = matched_edge(outcome, u, v)?;
    Ok(outcome.graph().weight_q(id) - alternative(outcome, u)? - alternative(outcome, v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    MatchedBalanced,
    MatchedQuasiBalancedNegativeSurplus,
    MatchedUnhappySaturated,
    MatchedUnhappyUnsaturated,
    /// Imbalanced but not unhappy; never present at a fixed point.
    MatchedOther,
    UnmatchedStable,
    UnmatchedUnstable,
}

impl EdgeKind {
    pub fn is_matched(self) -> bool {
        !matches!(self, EdgeKind::UnmatchedStable | EdgeKind::UnmatchedUnstable)
    }

    pub fn is_unhappy(self) -> bool {
        matches!(self, EdgeKind::MatchedUnhappySaturated | EdgeKind::MatchedUnhappyUnsaturated)
    }

    pub fn is_quasi_balanced(self) -> bool {
        matches!(self, EdgeKind::MatchedBalanced | EdgeKind::MatchedQuasiBalancedNegativeSurplus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStatus {
    pub u: Vertex,
    pub v: Vertex,
    pub kind: EdgeKind,
    /// Matched edges only.
    pub surplus: Option<Rational>,
    /// `|(x_u - α_u) - (x_v - α_v)|`, matched edges only.
    pub imbalance: Option<Rational>,
    /// `x_u + x_v - w_uv`, unmatched edges only.
    pub slack: Option<Rational>,
}

pub(crate) fn classify_matched_raw(
    graph: &WeightedGraph,
    matching: &Matching,
    x: &[Rational],
    u: Vertex,
    v: Vertex,
    w: &Rational,
) -> EdgeStatus {
    let au = alternative_raw(graph, matching, x, u);
    let av = alternative_raw(graph, matching, x, v);
    let s = w - &au - &av;
    let share_u = &au + half(&s);
    let share_v = &av + half(&s);
    let imbalance = ((&x[u] - &au) - (&x[v] - &av)).abs();
    let kind = if share_u.is_negative() || share_v.is_negative() {
        let saturated = (share_u.is_negative() && x[u].is_zero() && &x[v] == w)
            || (share_v.is_negative() && x[v].is_zero() && &x[u] == w);
        if saturated {
            EdgeKind::MatchedUnhappySaturated
        } else {
            EdgeKind::MatchedUnhappyUnsaturated
        }
    } else if imbalance.is_zero() {
        if s.is_negative() {
            EdgeKind::MatchedQuasiBalancedNegativeSurplus
        } else {
            EdgeKind::MatchedBalanced
        }
    } else {
        EdgeKind::MatchedOther
    };
    EdgeStatus { u, v, kind, surplus: Some(s), imbalance: Some(imbalance), slack: None }
}

pub fn classify_matched_edge(outcome: &Outcome, u: Vertex, v: Vertex) -> Result<EdgeStatus> {
    let id = matched_edge(outcome, u, v)?;
    let w = outcome.graph().weight_q(id);
    Ok(classify_matched_raw(outcome.graph(), outcome.matching(), &outcome.allocation().0, u, v, &w))
}

pub fn classify_unmatched_edge(outcome: &Outcome, u: Vertex, v: Vertex) -> Result<EdgeStatus> {
    let id = outcome.graph().require_edge(u, v)?;
    if outcome.matching().partner(u) == Some(v) {
        return Err(Error::Input(format!("{u}-{v} is in the matching")));
    }
    let slack = outcome.x(u) + outcome.x(v) - outcome.graph().weight_q(id);
    let kind = if slack.is_negative() { EdgeKind::UnmatchedUnstable } else { EdgeKind::UnmatchedStable };
    Ok(EdgeStatus { u, v, kind, surplus: None, imbalance: None, slack: Some(slack) })
}

/// Statuses of every edge, in edge-id order.
pub fn classify_all(outcome: &Outcome) -> Vec<EdgeStatus> {
    let g = outcome.graph();
    g.edges()
        .iter()
        .map(|e| {
            if outcome.matching().partner(e.u) == Some(e.v) {
                classify_matched_edge(outcome, e.u, e.v)
            } else {
                classify_unmatched_edge(outcome, e.u, e.v)
            }
            .expect("edge from the graph")
        })
        .collect()
}

/// Stability and balance summary of an outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeReport {
    pub stable: bool,
    pub quasi_balanced: bool,
    pub balanced: bool,
    pub eps: Rational,
    pub eps_quasi_balanced: bool,
    pub delta: Rational,
    pub delta_stable: bool,
    /// Largest matched-edge imbalance (0 with no matched edges).
    pub max_imbalance: Rational,
    pub worst_imbalance_edge: Option<(Vertex, Vertex)>,
    /// Smallest unmatched-edge slack, if any unmatched edge exists.
    pub min_slack: Option<Rational>,
    pub worst_slack_edge: Option<(Vertex, Vertex)>,
    /// `n · max_imbalance`, the stability bound that holds on maximum fractional matchings.
    pub n_eps_actual: Rational,
    pub unhappy_edges: Vec<(Vertex, Vertex)>,
    pub edges: Vec<EdgeStatus>,
}

impl OutcomeReport {
    /// Largest violation `w - x_u - x_v` over unmatched edges, floored at 0.
    pub fn max_instability(&self) -> Rational {
        match &self.min_slack {
            Some(s) if s.is_negative() => -s.clone(),
            _ => Rational::zero(),
        }
    }
}

pub fn check_outcome(outcome: &Outcome, eps: &Rational, delta: &Rational) -> Result<OutcomeReport> {
    outcome.validate()?;
    if eps.is_negative() || delta.is_negative() {
        return Err(Error::Input("eps and delta must be nonnegative".into()));
    }
    let edges = classify_all(outcome);
    let mut max_imbalance = Rational::zero();
    let mut worst_imbalance_edge = None;
    let mut min_slack: Option<Rational> = None;
    let mut worst_slack_edge = None;
    let mut unhappy_edges = Vec::new();
    for st in &edges {
        if let Some(imb) = &st.imbalance {
            if worst_imbalance_edge.is_none() || imb > &max_imbalance {
                max_imbalance = imb.clone();
                worst_imbalance_edge = Some((st.u, st.v));
            }
            if st.kind.is_unhappy() {
                unhappy_edges.push((st.u, st.v));
            }
        }
        if let Some(sl) = &st.slack {
            if min_slack.as_ref().is_none_or(|m| sl < m) {
                min_slack = Some(sl.clone());
                worst_slack_edge = Some((st.u, st.v));
            }
        }
    }
    let stable = min_slack.as_ref().is_none_or(|s| !s.is_negative());
    let quasi_balanced = max_imbalance.is_zero();
    let delta_stable = min_slack.as_ref().is_none_or(|s| s >= &-delta.clone());
    let n = int(outcome.graph().vertex_count() as i64);
    Ok(OutcomeReport {
        stable,
        quasi_balanced,
        balanced: stable && quasi_balanced,
        eps: eps.clone(),
        eps_quasi_balanced: &max_imbalance <= eps,
        delta: delta.clone(),
        delta_stable,
        n_eps_actual: &n * &max_imbalance,
        max_imbalance,
        worst_imbalance_edge,
        min_slack,
        worst_slack_edge,
        unhappy_edges,
        edges,
    })
}

impl fmt::Display for OutcomeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stable: {}", self.stable)?;
        writeln!(f, "quasi_balanced: {}", self.quasi_balanced)?;
        writeln!(f, "balanced: {}", self.balanced)?;
        writeln!(f, "eps_quasi_balanced({}): {}", format(&self.eps), self.eps_quasi_balanced)?;
        writeln!(f, "delta_stable({}): {}", format(&self.delta), self.delta_stable)?;
        match self.worst_imbalance_edge {
            Some((u, v)) => writeln!(f, "max_imbalance: {} at {u}-{v}", format(&self.max_imbalance))?,
            None => writeln!(f, "max_imbalance: 0 (no matched edges)")?,
        }
        match (&self.min_slack, self.worst_slack_edge) {
            (Some(s), Some((u, v))) => writeln!(f, "min_slack: {} at {u}-{v}", format(s))?,
            _ => writeln!(f, "min_slack: none (no unmatched edges)")?,
        }
        writeln!(f, "n_eps_actual: {}", format(&self.n_eps_actual))?;
        if !self.unhappy_edges.is_empty() {
            let list: Vec<String> = self.unhappy_edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            writeln!(f, "unhappy: {}", list.join(" "))?;
        }
        for st in &self.edges {
            let detail = match (&st.surplus, &st.imbalance, &st.slack) {
                (Some(s), Some(i), _) => format!("surplus={} imbalance={}", format(s), format(i)),
                (_, _, Some(sl)) => format!("slack={}", format(sl)),
                _ => String::new(),
            };
            writeln!(f, "  {}-{} {:?} {}", st.u, st.v, st.kind, detail)?;
        }
        Ok(())
    }
}
