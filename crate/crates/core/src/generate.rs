//! Seeded random instances for property suites and batch sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, WeightedGraph};
use crate::outcome::Matching;
use crate::witness::{has_balanced_outcome, max_weight_matching, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_weight: u64,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams { min_vertices: 3, max_vertices: 10, max_edges: 20, max_weight: 5 }
    }
}

/// How the matching of a generated instance is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingRule {
    /// A maximum-weight integral matching.
    MaxWeight,
    /// Greedy over a random edge order.
    RandomMaximal,
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph with at least one edge.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, p: &GraphParams) -> WeightedGraph {
    let n = rng.gen_range(p.min_vertices.max(2)..=p.max_vertices.max(p.min_vertices.max(2)));
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let cap = p.max_edges.min(DEFAULT_ENUMERATION_CAP).min(pairs.len()).max(1);
    let lo = (n - 1).min(cap);
    let m = rng.gen_range(lo..=cap);
    pairs.truncate(m);
    pairs.sort();
    let edges = pairs.into_iter().map(|(a, b)| (a, b, rng.gen_range(1..=p.max_weight.max(1))));
    WeightedGraph::new(n, edges).expect("generated graph is valid")
}

/// Greedy maximal matching over a shuffled edge order.
pub fn random_maximal_matching<R: Rng + ?Sized>(graph: &WeightedGraph, rng: &mut R) -> Matching {
    let mut ids: Vec<EdgeId> = (0..graph.edge_count()).collect();
    ids.shuffle(rng);
    let mut used = vec![false; graph.vertex_count()];
    let mut chosen = Vec::new();
    for id in ids {
        let e = graph.edge(id);
        if !used[e.u] && !used[e.v] {
            used[e.u] = true;
            used[e.v] = true;
            chosen.push(id);
        }
    }
    Matching::from_edge_ids(graph, chosen).expect("greedy choice is a matching")
}

pub fn pick_matching<R: Rng + ?Sized>(graph: &WeightedGraph, rule: MatchingRule, rng: &mut R) -> Result<Matching> {
    match rule {
        MatchingRule::MaxWeight => max_weight_matching(graph),
        MatchingRule::RandomMaximal => Ok(random_maximal_matching(graph, rng)),
    }
}

/// First graph/matching drawn from `seed` whose balanced-outcome verdict equals `balanced`.
pub fn instance_with_verdict(
    seed: u64,
    p: &GraphParams,
    rule: MatchingRule,
    balanced: bool,
) -> Result<(WeightedGraph, Matching)> {
    let mut rng = rng_for(seed);
    for _ in 0..10_000 {
        let g = random_graph(&mut rng, p);
        let m = pick_matching(&g, rule, &mut rng)?;
        if has_balanced_outcome(&g, &m)? == balanced {
            return Ok((g, m));
        }
    }
    Err(Error::Input(format!("seed {seed}: no instance with verdict {balanced} in 10000 draws")))
}
