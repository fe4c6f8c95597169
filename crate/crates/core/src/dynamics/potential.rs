use num_traits::Zero;

use crate::graph::WeightedGraph;
use crate::outcome::Outcome;
use crate::rational::{half, int, Rational};

/// The sorted slacks of an allocation: every `x_v` plus every `x_u + x_v - w_uv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackVector(Vec<Rational>);

impl SlackVector {
    pub(crate) fn from_raw(graph: &WeightedGraph, x: &[Rational]) -> Self {
        let mut s: Vec<Rational> = Vec::with_capacity(graph.vertex_count() + graph.edge_count());
        s.extend(x.iter().cloned());
        for (id, e) in graph.edges().iter().enumerate() {
            s.push(&x[e.u] + &x[e.v] - graph.weight_q(id));
        }
        s.sort();
        SlackVector(s)
    }

    /// Builds from arbitrary values (sorted on construction).
    pub fn from_values(mut values: Vec<Rational>) -> Self {
        values.sort();
        SlackVector(values)
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn slack_vector(outcome: &Outcome) -> SlackVector {
    SlackVector::from_raw(outcome.graph(), &outcome.allocation().0)
}

/// `Φ(s) = Σ_{i≥1} 2^{-i} s_i`, evaluated exactly by Horner's rule from the tail.
pub fn potential_phi(sv: &SlackVector) -> Rational {
    sv.0.iter().rev().fold(Rational::zero(), |acc, s| half(&(acc + s)))
}

/// Upper bound `2W` on `Φ` for a graph.
pub fn phi_upper_bound(graph: &WeightedGraph) -> Rational {
    int(2 * graph.max_weight() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{Allocation, Matching};
    use crate::rational::{pow2_inv, ratio};

    fn single(xu: i64, xv: i64) -> Outcome {
        let g = WeightedGraph::new(2, [(0, 1, 2)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        Outcome::new(g, m, Allocation(vec![int(xu), int(xv)])).unwrap()
    }

    #[test]
    fn single_edge_slacks() {
        assert_eq!(slack_vector(&single(0, 2)).values(), &[int(0), int(0), int(2)]);
        assert_eq!(slack_vector(&single(1, 1)).values(), &[int(0), int(1), int(1)]);
    }

    #[test]
    fn p4_balanced_slacks() {
        let g = WeightedGraph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1), (2, 3)]).unwrap();
        let x = Allocation(vec![ratio(1, 3), ratio(2, 3), ratio(2, 3), ratio(1, 3)]);
        let sv = slack_vector(&Outcome::new(g, m, x).unwrap());
        let t = ratio(1, 3);
        let tt = ratio(2, 3);
        assert_eq!(sv.values(), &[int(0), int(0), t.clone(), t.clone(), t, tt.clone(), tt]);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(potential_phi(&slack_vector(&single(0, 2))), ratio(1, 4));
        assert_eq!(potential_phi(&slack_vector(&single(1, 1))), ratio(3, 8));
        // the step (0,2) -> (1,1) gains exactly 1 · 2^-(n+m)
        let gain = ratio(3, 8) - ratio(1, 4);
        assert_eq!(gain, pow2_inv(3));
    }

    #[test]
    fn phi_matches_direct_sum() {
        let sv = SlackVector::from_values(vec![int(-1), ratio(1, 3), int(2), int(0)]);
        let direct: Rational = sv.values().iter().enumerate().map(|(i, s)| s * pow2_inv(i + 1)).sum();
        assert_eq!(potential_phi(&sv), direct);
    }
}
