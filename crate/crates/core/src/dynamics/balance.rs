use num_traits::Signed;

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightedGraph};
use crate::outcome::{Allocation, Matching, Outcome};
use crate::rational::{half, Rational};
use crate::status::alternative_raw;

/// New `(x_u, x_v)` after balancing matched edge `uv` with weight `w`.
///
/// Nash split of the surplus, clamped to `(0, w)` or `(w, 0)` when one side's
/// share would go negative.
pub(crate) fn balanced_pair(
    graph: &WeightedGraph,
    matching: &Matching,
    x: &[Rational],
    u: Vertex,
    v: Vertex,
    w: &Rational,
) -> (Rational, Rational) {
    let au = alternative_raw(graph, matching, x, u);
    let av = alternative_raw(graph, matching, x, v);
    let s = w - &au - &av;
    let xu = &au + half(&s);
    let xv = &av + half(&s);
    if xu.is_negative() {
        (Rational::from_integer(0.into()), w.clone())
    } else if xv.is_negative() {
        (w.clone(), Rational::from_integer(0.into()))
    } else {
        (xu, xv)
    }
}

/// One edge-balancing step on matched edge `uv`. All other allocations are unchanged.
pub fn balance_edge(outcome: &Outcome, u: Vertex, v: Vertex) -> Result<Outcome> {
    let g = outcome.graph();
    let id = g.require_edge(u, v)?;
    if outcome.matching().partner(u) != Some(v) {
        return Err(Error::Input(format!("{u}-{v} is not in the matching")));
    }
    let w = g.weight_q(id);
    let (xu, xv) = balanced_pair(g, outcome.matching(), &outcome.allocation().0, u, v, &w);
    let mut x = outcome.allocation().0.clone();
    x[u] = xu;
    x[v] = xv;
    Ok(Outcome::from_parts_unchecked(outcome.graph_arc().clone(), outcome.matching_arc().clone(), Allocation(x)))
}
