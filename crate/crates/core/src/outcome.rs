use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex, WeightedGraph};
use crate::rational::{format, int, ratio, Rational};

/// A set of vertex-disjoint edges of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    edges: Vec<EdgeId>,
    partner: Vec<Option<Vertex>>,
}

impl Matching {
    pub fn empty(graph: &WeightedGraph) -> Self {
        Matching { edges: Vec::new(), partner: vec![None; graph.vertex_count()] }
    }

    pub fn from_edge_ids(graph: &WeightedGraph, ids: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut partner = vec![None; graph.vertex_count()];
        let mut edges = Vec::new();
        let mut problems = Vec::new();
        for id in ids {
            if id >= graph.edge_count() {
                problems.push(format!("edge id {id} out of range"));
                continue;
            }
            let e = graph.edge(id);
            if partner[e.u].is_some() || partner[e.v].is_some() {
                let shared = if partner[e.u].is_some() { e.u } else { e.v };
                problems.push(format!("matching edges share vertex {shared} (at edge {}-{})", e.u, e.v));
                continue;
            }
            partner[e.u] = Some(e.v);
            partner[e.v] = Some(e.u);
            edges.push(id);
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        edges.sort_unstable();
        Ok(Matching { edges, partner })
    }

    pub fn from_pairs(graph: &WeightedGraph, pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut ids = Vec::new();
        let mut problems = Vec::new();
        for (a, b) in pairs {
            match graph.edge_id(a, b) {
                Some(id) => ids.push(id),
                None => problems.push(format!("matching pair {a}-{b} is not an edge")),
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Self::from_edge_ids(graph, ids)
    }

    /// Matched edge ids, ascending.
    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn partner(&self, v: Vertex) -> Option<Vertex> {
        self.partner.get(v).copied().flatten()
    }

    pub fn is_covered(&self, v: Vertex) -> bool {
        self.partner(v).is_some()
    }

    pub fn contains(&self, graph: &WeightedGraph, id: EdgeId) -> bool {
        let e = graph.edge(id);
        self.partner(e.u) == Some(e.v)
    }

    pub fn weight(&self, graph: &WeightedGraph) -> u64 {
        self.edges.iter().map(|&id| graph.edge(id).w).sum()
    }

    pub fn pairs(&self, graph: &WeightedGraph) -> Vec<(Vertex, Vertex)> {
        self.edges.iter().map(|&id| graph.edge(id).key()).collect()
    }
}

/// Per-vertex payoff `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation(pub Vec<Rational>);

impl Allocation {
    pub fn zeros(n: usize) -> Self {
        Allocation(vec![Rational::zero(); n])
    }

    pub fn get(&self, v: Vertex) -> &Rational {
        &self.0[v]
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// Lower-id endpoint of each matched edge gets 0, the other gets the weight.
    pub fn lower_zero(graph: &WeightedGraph, matching: &Matching) -> Self {
        let mut x = Self::zeros(graph.vertex_count());
        for &id in matching.edge_ids() {
            let e = graph.edge(id);
            x.0[e.v] = int(e.w as i64);
        }
        x
    }

    pub fn equal_split(graph: &WeightedGraph, matching: &Matching) -> Self {
        let mut x = Self::zeros(graph.vertex_count());
        for &id in matching.edge_ids() {
            let e = graph.edge(id);
            let h = ratio(e.w as i64, 2);
            x.0[e.u] = h.clone();
            x.0[e.v] = h;
        }
        x
    }

    /// Each matched edge gets a uniformly random split on the grid `w·k/2^bits`.
    pub fn random<R: Rng + ?Sized>(graph: &WeightedGraph, matching: &Matching, rng: &mut R, bits: u32) -> Self {
        let mut x = Self::zeros(graph.vertex_count());
        let denom = 1i64 << bits;
        for &id in matching.edge_ids() {
            let e = graph.edge(id);
            let k = rng.gen_range(0..=denom);
            let xu = ratio(e.w as i64 * k, denom);
            x.0[e.v] = int(e.w as i64) - &xu;
            x.0[e.u] = xu;
        }
        x
    }
}

/// A matching with a valid allocation on a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    graph: Arc<WeightedGraph>,
    matching: Arc<Matching>,
    allocation: Allocation,
}

impl Outcome {
    pub fn new(
        graph: impl Into<Arc<WeightedGraph>>,
        matching: impl Into<Arc<Matching>>,
        allocation: Allocation,
    ) -> Result<Self> {
        let graph = graph.into();
        let matching = matching.into();
        let problems = allocation_violations(&graph, &matching, &allocation);
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Outcome { graph, matching, allocation })
    }

    pub(crate) fn from_parts_unchecked(
        graph: Arc<WeightedGraph>,
        matching: Arc<Matching>,
        allocation: Allocation,
    ) -> Self {
        debug_assert!(allocation_violations(&graph, &matching, &allocation).is_empty());
        Outcome { graph, matching, allocation }
    }

    /// Replaces the allocation, keeping graph and matching.
    pub fn with_allocation(&self, allocation: Allocation) -> Result<Self> {
        Outcome::new(self.graph.clone(), self.matching.clone(), allocation)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn matching_arc(&self) -> &Arc<Matching> {
        &self.matching
    }

    pub fn allocation(&self) -> &Allocation {
        &self.allocation
    }

    pub fn x(&self, v: Vertex) -> &Rational {
        &self.allocation.0[v]
    }

    pub fn validate(&self) -> Result<()> {
        let problems = allocation_violations(&self.graph, &self.matching, &self.allocation);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

fn allocation_violations(graph: &WeightedGraph, matching: &Matching, x: &Allocation) -> Vec<String> {
    let mut problems = Vec::new();
    let n = graph.vertex_count();
    if x.0.len() != n {
        problems.push(format!("allocation has {} entries, graph has {n} vertices", x.0.len()));
        return problems;
    }
    if matching.partner.len() != n {
        problems.push("matching was built for a different graph".to_string());
        return problems;
    }
    for (v, xv) in x.0.iter().enumerate() {
        if xv.is_negative() {
            problems.push(format!("x[{v}] = {} is negative", format(xv)));
        }
        if !matching.is_covered(v) && !xv.is_zero() {
            problems.push(format!("unmatched vertex {v} has x = {} (must be 0)", format(xv)));
        }
    }
    for &id in matching.edge_ids() {
        let e = graph.edge(id);
        let sum = &x.0[e.u] + &x.0[e.v];
        if sum != int(e.w as i64) {
            problems.push(format!("matched edge {}-{}: x sum {} differs from weight {}", e.u, e.v, format(&sum), e.w));
        }
    }
    problems
}
