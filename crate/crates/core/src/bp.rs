//! Max-product message passing that selects the matching.
//!
//! Each vertex `u` tells each neighbor `v` the best it could get elsewhere:
//! `a_{u→v} = max{0, max over q ~ u, q ≠ v of (w_qu - a_{q→u})}`. Messages
//! start at 0 and update synchronously. At a fixed point, `uv` is matched iff
//! `a_{u→v} + a_{v→u} ≤ w_uv`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex, WeightedGraph};
use crate::outcome::Matching;
use crate::rational::{format, int, Rational};

/// A graph with exact rational edge weights, so that weights can be perturbed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpProblem<'g> {
    graph: &'g WeightedGraph,
    weights: Vec<Rational>,
}

impl<'g> BpProblem<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let weights = (0..graph.edge_count()).map(|id| graph.weight_q(id)).collect();
        BpProblem { graph, weights }
    }

    pub fn with_weights(graph: &'g WeightedGraph, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != graph.edge_count() {
            return Err(Error::Input(format!("{} weights for {} edges", weights.len(), graph.edge_count())));
        }
        if let Some(id) = weights.iter().position(|w| w <= &Rational::zero()) {
            return Err(Error::validation(format!("edge {id}: weight must be positive")));
        }
        Ok(BpProblem { graph, weights })
    }

    /// `w_e + id · η`, which makes ties between optima unlikely.
    pub fn perturbed(graph: &'g WeightedGraph, eta: &Rational) -> Self {
        let weights = (0..graph.edge_count()).map(|id| graph.weight_q(id) + eta * int(id as i64)).collect();
        BpProblem { graph, weights }
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn max_weight(&self) -> Rational {
        self.weights.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

/// `a_{u→v}` for every ordered adjacent pair, plus the iteration count.
/// Slot `2·id` holds the message from the lower endpoint, `2·id + 1` the reverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageState {
    pub t: u64,
    values: Vec<Rational>,
}

fn slot(graph: &WeightedGraph, id: EdgeId, from: Vertex) -> usize {
    2 * id + usize::from(graph.edge(id).u != from)
}

impl MessageState {
    pub fn initial(graph: &WeightedGraph) -> Self {
        MessageState { t: 0, values: vec![Rational::zero(); 2 * graph.edge_count()] }
    }

    /// `a_{from→to}`; `None` when the pair is not an edge.
    pub fn message(&self, graph: &WeightedGraph, from: Vertex, to: Vertex) -> Option<&Rational> {
        let id = graph.edge_id(from, to)?;
        Some(&self.values[slot(graph, id, from)])
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn max_value(&self) -> Rational {
        self.values.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Ordered pair `(from, to)` to message value, for dumps.
    pub fn to_map(&self, graph: &WeightedGraph) -> BTreeMap<(Vertex, Vertex), Rational> {
        let mut out = BTreeMap::new();
        for (id, e) in graph.edges().iter().enumerate() {
            out.insert((e.u, e.v), self.values[2 * id].clone());
            out.insert((e.v, e.u), self.values[2 * id + 1].clone());
        }
        out
    }
}

/// One synchronous update of every message.
pub fn bp_step(state: &MessageState, problem: &BpProblem) -> MessageState {
    let g = problem.graph;
    let mut values = vec![Rational::zero(); state.values.len()];
    for u in 0..g.vertex_count() {
        let nb = g.neighbors(u);
        // w_qu - a_{q→u} for each neighbor q of u
        let offers: Vec<Rational> =
            nb.iter().map(|&(q, id)| &problem.weights[id] - &state.values[slot(g, id, q)]).collect();
        for (i, &(_, id)) in nb.iter().enumerate() {
            let mut best = Rational::zero();
            for (j, o) in offers.iter().enumerate() {
                if j != i && o > &best {
                    best = o.clone();
                }
            }
            values[slot(g, id, u)] = best;
        }
    }
    MessageState { t: state.t + 1, values }
}

/// Edges whose messages satisfy `a_{u→v} + a_{v→u} ≤ w_uv`, as a matching.
pub fn extract_matching(state: &MessageState, problem: &BpProblem) -> Result<Matching> {
    let g = problem.graph;
    let chosen: Vec<EdgeId> = (0..g.edge_count())
        .filter(|&id| &state.values[2 * id] + &state.values[2 * id + 1] <= problem.weights[id])
        .collect();
    let mut used = vec![false; g.vertex_count()];
    let mut clash = Vec::new();
    for &id in &chosen {
        let e = g.edge(id);
        if used[e.u] || used[e.v] {
            clash.push((e.u, e.v));
        }
        used[e.u] = true;
        used[e.v] = true;
    }
    if !clash.is_empty() {
        return Err(Error::AmbiguousOptimum(chosen.iter().map(|&id| g.edge(id).key()).collect()));
    }
    Matching::from_edge_ids(g, chosen)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BpStatus {
    /// Two consecutive states were equal at iteration `t`.
    Converged {
        t: u64,
    },
    Diverged {
        iterations: u64,
    },
}

impl fmt::Display for BpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BpStatus::Converged { t } => write!(f, "converged at t={t}"),
            BpStatus::Diverged { iterations } => write!(f, "diverged after {iterations} iterations"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpResult {
    pub status: BpStatus,
    /// The last state computed.
    pub state: MessageState,
    /// Present exactly when converged.
    pub matching: Option<Matching>,
}

impl BpResult {
    pub fn converged(&self) -> bool {
        matches!(self.status, BpStatus::Converged { .. })
    }
}

/// Iterates until two consecutive states coincide or `max_iters` updates ran.
pub fn bp_run(problem: &BpProblem, max_iters: u64) -> Result<BpResult> {
    if problem.graph.vertex_count() == 0 {
        return Err(Error::Input("empty graph".into()));
    }
    if max_iters == 0 {
        return Err(Error::Input("max_iters must be positive".into()));
    }
    let mut state = MessageState::initial(problem.graph);
    while state.t < max_iters {
        let next = bp_step(&state, problem);
        if next.values == state.values {
            let matching = extract_matching(&next, problem)?;
            return Ok(BpResult { status: BpStatus::Converged { t: next.t }, state: next, matching: Some(matching) });
        }
        state = next;
    }
    Ok(BpResult { status: BpStatus::Diverged { iterations: state.t }, state, matching: None })
}

#[derive(Debug, Serialize)]
struct MessageEntry {
    from: Vertex,
    to: Vertex,
    a: String,
}

#[derive(Debug, Serialize)]
struct Dump {
    status: String,
    t: u64,
    messages: Vec<MessageEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matching: Option<Vec<(Vertex, Vertex)>>,
}

/// JSON dump of the final messages and, if converged, the matching.
pub fn message_dump_json(result: &BpResult, graph: &WeightedGraph) -> String {
    let dump = Dump {
        status: match result.status {
            BpStatus::Converged { .. } => "converged".into(),
            BpStatus::Diverged { .. } => "diverged".into(),
        },
        t: result.state.t,
        messages: result
            .state
            .to_map(graph)
            .into_iter()
            .map(|((from, to), a)| MessageEntry { from, to, a: format(&a) })
            .collect(),
        matching: result.matching.as_ref().map(|m| m.pairs(graph)),
    };
    serde_json::to_string_pretty(&dump).expect("dump serializes")
}
