//! Half-integral fractional matchings and the exhaustive maximum-weight oracle.
//!
//! The fractional matching polytope has half-integral vertices, so the
//! maximum of `Σ y_e w_e` over `y ≥ 0` with per-vertex sums `≤ 1` is attained
//! on `{0, 1/2, 1}^E`. The oracle enumerates that grid with degree pruning and
//! a vertex-capacity bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex, WeightedGraph};
use crate::outcome::Matching;
use crate::rational::{format, int, Rational};

pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// `y_e ∈ {0, 1/2, 1}` stored in halves (0, 1, 2) per edge id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FractionalMatching {
    halves: Vec<u8>,
}

impl FractionalMatching {
    pub fn zero(graph: &WeightedGraph) -> Self {
        FractionalMatching { halves: vec![0; graph.edge_count()] }
    }

    pub fn from_halves(halves: Vec<u8>) -> Result<Self> {
        if let Some(bad) = halves.iter().position(|&h| h > 2) {
            return Err(Error::validation(format!("edge {bad}: value {}/2 is not in {{0, 1/2, 1}}", halves[bad])));
        }
        Ok(FractionalMatching { halves })
    }

    pub fn indicator(graph: &WeightedGraph, matching: &Matching) -> Self {
        let mut y = Self::zero(graph);
        for &id in matching.edge_ids() {
            y.halves[id] = 2;
        }
        y
    }

    pub fn set_halves(&mut self, id: EdgeId, halves: u8) {
        assert!(halves <= 2);
        self.halves[id] = halves;
    }

    pub fn halves(&self, id: EdgeId) -> u8 {
        self.halves[id]
    }

    pub fn value(&self, id: EdgeId) -> Rational {
        Rational::new(BigInt::from(self.halves[id]), BigInt::from(2))
    }

    pub fn is_integral(&self) -> bool {
        self.halves.iter().all(|&h| h != 1)
    }

    /// Nonzero entries as `(u, v, y)`.
    pub fn support(&self, graph: &WeightedGraph) -> Vec<(Vertex, Vertex, Rational)> {
        self.halves
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(id, _)| {
                let e = graph.edge(id);
                (e.u, e.v, self.value(id))
            })
            .collect()
    }

    pub fn edge_len(&self) -> usize {
        self.halves.len()
    }

    pub fn render(&self, graph: &WeightedGraph) -> String {
        let parts: Vec<String> = self.support(graph).iter().map(|(u, v, y)| format!("{u}-{v}:{}", format(y))).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Checks `Σ_{e∋v} y_e ≤ 1` at every vertex and returns `Σ y_e w_e`.
pub fn verify_fractional_matching(graph: &WeightedGraph, y: &FractionalMatching) -> Result<Rational> {
    if y.edge_len() != graph.edge_count() {
        return Err(Error::validation(format!(
            "fractional matching has {} entries, graph has {} edges",
            y.edge_len(),
            graph.edge_count()
        )));
    }
    let mut load = vec![0u32; graph.vertex_count()];
    let mut twice = 0u64;
    for (id, e) in graph.edges().iter().enumerate() {
        let h = y.halves(id) as u32;
        load[e.u] += h;
        load[e.v] += h;
        twice += h as u64 * e.w;
    }
    let problems: Vec<String> = load
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 2)
        .map(|(v, &l)| format!("vertex {v} has fractional degree {}", format(&Rational::new(l.into(), 2.into()))))
        .collect();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    Ok(Rational::new(BigInt::from(twice), BigInt::from(2)))
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalOptimum {
    pub weight: Rational,
    pub maximizer: FractionalMatching,
    /// Number of optimal vectors found, saturating at 2 (only counted when requested).
    pub optimal_count: usize,
}

impl FractionalOptimum {
    pub fn is_unique(&self) -> bool {
        self.optimal_count == 1
    }
}

/// Maximum fractional matching weight and a maximizer.
pub fn max_fractional_weight(graph: &WeightedGraph) -> Result<(Rational, FractionalMatching)> {
    let opt = search(graph, &integer_weights(graph), DEFAULT_ENUMERATION_CAP, true, false)?;
    Ok((opt.weight, opt.maximizer))
}

pub fn max_fractional_weight_capped(graph: &WeightedGraph, cap: usize) -> Result<(Rational, FractionalMatching)> {
    let opt = search(graph, &integer_weights(graph), cap, true, false)?;
    Ok((opt.weight, opt.maximizer))
}

/// Maximum fractional matching under arbitrary positive rational weights
/// (indexed by edge id), counting optimal vectors.
pub fn max_fractional_with_weights(graph: &WeightedGraph, weights: &[Rational]) -> Result<FractionalOptimum> {
    let (scaled, denom) = scale_to_integers(weights);
    let mut opt = search(graph, &scaled, DEFAULT_ENUMERATION_CAP, true, true)?;
    opt.weight /= Rational::from_integer(denom);
    Ok(opt)
}

/// Maximum-weight integral matching, by the same enumeration restricted to `{0, 1}`.
pub fn max_weight_matching(graph: &WeightedGraph) -> Result<Matching> {
    let opt = search(graph, &integer_weights(graph), DEFAULT_ENUMERATION_CAP, false, false)?;
    let ids: Vec<EdgeId> = (0..graph.edge_count()).filter(|&id| opt.maximizer.halves(id) == 2).collect();
    Matching::from_edge_ids(graph, ids)
}

/// Balanced outcomes exist on `matching` iff it is a maximum fractional matching.
pub fn has_balanced_outcome(graph: &WeightedGraph, matching: &Matching) -> Result<bool> {
    let (best, _) = max_fractional_weight(graph)?;
    Ok(int(matching.weight(graph) as i64) == best)
}

fn integer_weights(graph: &WeightedGraph) -> Vec<BigInt> {
    graph.edges().iter().map(|e| BigInt::from(e.w)).collect()
}

fn scale_to_integers(weights: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let denom = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled = weights.iter().map(|w| (w * Rational::from_integer(denom.clone())).to_integer()).collect();
    (scaled, denom)
}

struct Search<'a> {
    ends: Vec<(Vertex, Vertex)>,
    weights: Vec<i128>,
    order: Vec<EdgeId>,
    /// `suffix_max[i][v]`: largest weight among `order[i..]` touching `v`.
    suffix_max: Vec<Vec<i128>>,
    cap: Vec<u8>,
    current: Vec<u8>,
    value: i128,
    best: i128,
    best_y: Vec<u8>,
    count: usize,
    count_ties: bool,
    choices: &'a [u8],
}

impl Search<'_> {
    fn bound(&self, i: usize) -> i128 {
        // each remaining edge's contribution h_e·w_e is charged half to each endpoint
        let row = &self.suffix_max[i];
        let total: i128 = self.cap.iter().zip(row).map(|(&c, &w)| c as i128 * w).sum();
        total / 2
    }

    fn go(&mut self, i: usize) {
        let limit = self.value + self.bound(i);
        let want_ties = self.count_ties && self.count < 2;
        if self.count > 0 && (limit < self.best || (limit == self.best && !want_ties)) {
            return;
        }
        if i == self.order.len() {
            if self.value > self.best || self.count == 0 {
                self.best = self.value;
                self.best_y.clone_from(&self.current);
                self.count = 1;
            } else if self.value == self.best {
                self.count = (self.count + 1).min(2);
            }
            return;
        }
        let id = self.order[i];
        let (u, v) = self.ends[id];
        let room = self.cap[u].min(self.cap[v]);
        for &h in self.choices {
            if h > room {
                continue;
            }
            self.cap[u] -= h;
            self.cap[v] -= h;
            self.current[id] = h;
            self.value += h as i128 * self.weights[id];
            self.go(i + 1);
            self.value -= h as i128 * self.weights[id];
            self.current[id] = 0;
            self.cap[u] += h;
            self.cap[v] += h;
        }
    }
}

fn search(
    graph: &WeightedGraph,
    weights: &[BigInt],
    cap: usize,
    fractional: bool,
    count_ties: bool,
) -> Result<FractionalOptimum> {
    let m = graph.edge_count();
    if m > cap {
        return Err(Error::Capacity { edges: m, cap });
    }
    let n = graph.vertex_count();
    let w: Vec<i128> = weights
        .iter()
        .map(|b| b.to_i128().ok_or_else(|| Error::Input("edge weight too large for the oracle".into())))
        .collect::<Result<_>>()?;
    if w.iter().any(|&x| x <= 0) {
        return Err(Error::Input("oracle weights must be positive".into()));
    }
    let mut order: Vec<EdgeId> = (0..m).collect();
    order.sort_by(|&a, &b| w[b].cmp(&w[a]).then(a.cmp(&b)));
    let ends: Vec<(Vertex, Vertex)> = graph.edges().iter().map(|e| e.key()).collect();
    let mut suffix_max = vec![vec![0i128; n]; m + 1];
    for i in (0..m).rev() {
        let (u, v) = ends[order[i]];
        let mut row = suffix_max[i + 1].clone();
        row[u] = row[u].max(w[order[i]]);
        row[v] = row[v].max(w[order[i]]);
        suffix_max[i] = row;
    }
    let choices: &[u8] = if fractional { &[2, 1, 0] } else { &[2, 0] };
    let mut s = Search {
        ends,
        weights: w,
        order,
        suffix_max,
        cap: vec![2; n],
        current: vec![0; m],
        value: 0,
        best: 0,
        best_y: vec![0; m],
        count: 0,
        count_ties,
        choices,
    };
    s.go(0);
    // values are in halves of a weight unit
    let weight = Rational::new(BigInt::from(s.best), BigInt::from(2));
    Ok(FractionalOptimum {
        weight,
        maximizer: FractionalMatching { halves: s.best_y },
        optimal_count: if count_ties { s.count } else { 1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap()
    }

    #[test]
    fn verify_examples() {
        let g = triangle();
        let half = FractionalMatching::from_halves(vec![1, 1, 1]).unwrap();
        assert_eq!(verify_fractional_matching(&g, &half).unwrap(), ratio(3, 2));
        let m = Matching::from_pairs(&g, [(1, 2)]).unwrap();
        assert_eq!(verify_fractional_matching(&g, &FractionalMatching::indicator(&g, &m)).unwrap(), int(1));
        let clash = FractionalMatching::from_halves(vec![2, 2, 0]).unwrap();
        let err = verify_fractional_matching(&g, &clash).unwrap_err();
        assert!(err.to_string().contains("vertex 1"), "{err}");
        assert!(FractionalMatching::from_halves(vec![3]).is_err());
    }

    #[test]
    fn oracle_examples() {
        let (w, y) = max_fractional_weight(&triangle()).unwrap();
        assert_eq!(w, ratio(3, 2));
        assert!(!y.is_integral());

        let single = WeightedGraph::new(2, [(0, 1, 7)]).unwrap();
        let (w, y) = max_fractional_weight(&single).unwrap();
        assert_eq!((w, y.halves(0)), (int(7), 2));

        let p4 = WeightedGraph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let (w, y) = max_fractional_weight(&p4).unwrap();
        assert_eq!(w, int(2));
        assert_eq!((y.halves(0), y.halves(1), y.halves(2)), (2, 0, 2));
    }

    #[test]
    fn balanced_outcome_decision() {
        let p4 = WeightedGraph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        assert!(has_balanced_outcome(&p4, &Matching::from_pairs(&p4, [(0, 1), (2, 3)]).unwrap()).unwrap());
        let t = triangle();
        assert!(!has_balanced_outcome(&t, &Matching::from_pairs(&t, [(0, 2)]).unwrap()).unwrap());
        let abc = WeightedGraph::new(3, [(0, 1, 1), (1, 2, 2)]).unwrap();
        assert!(!has_balanced_outcome(&abc, &Matching::from_pairs(&abc, [(0, 1)]).unwrap()).unwrap());
    }

    #[test]
    fn capacity_error_over_cap() {
        let edges: Vec<_> = (0..25).map(|i| (i, i + 1, 1)).collect();
        let g = WeightedGraph::new(26, edges).unwrap();
        assert!(matches!(max_fractional_weight(&g), Err(Error::Capacity { edges: 25, cap: 24 })));
        assert!(max_fractional_weight_capped(&g, 30).is_ok());
    }

    #[test]
    fn integral_oracle_on_triangle() {
        let m = max_weight_matching(&triangle()).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn tie_counting() {
        let t = triangle();
        // unit triangle: three maximum matchings of weight 1 are dominated by all-halves
        let opt = max_fractional_with_weights(&t, &[int(1), int(1), int(1)]).unwrap();
        assert_eq!(opt.weight, ratio(3, 2));
        assert!(opt.is_unique());
        let p3 = WeightedGraph::new(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        let opt = max_fractional_with_weights(&p3, &[int(1), int(1)]).unwrap();
        assert_eq!(opt.optimal_count, 2);
        let opt = max_fractional_with_weights(&p3, &[int(1), ratio(1001, 1000)]).unwrap();
        assert!(opt.is_unique());
        assert_eq!(opt.maximizer.halves(1), 2);
    }
}
