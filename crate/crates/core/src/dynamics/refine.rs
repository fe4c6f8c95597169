//! Snapping an approximate fixed point onto an exactly balanced outcome.
//!
//! The dynamics approach balanced outcomes geometrically but usually never
//! reach them (dyadic iterates vs. limits such as 1/3). Near the limit the
//! active alternatives are visible: for each matched vertex, which unmatched
//! neighbors (or the zero floor) come within `tolerance` of attaining `α_v`.
//! Fixing those choices turns balance into a linear system, solved here
//! exactly. The result is returned only if it checks out as balanced.

use num_traits::{One, Zero};

use crate::graph::Vertex;
use crate::outcome::{Allocation, Outcome};
use crate::rational::{int, Rational};
use crate::status::{alternative_raw, check_outcome};

/// Exact balanced outcome near `outcome`, if the active-alternative guess
/// yields one.
pub fn refine_to_balanced(outcome: &Outcome, tolerance: &Rational) -> Option<Outcome> {
    let g = outcome.graph();
    let m = outcome.matching();
    let x = &outcome.allocation().0;
    let n = g.vertex_count();

    // variables: x_v then α_v for each matched vertex
    let matched: Vec<Vertex> = (0..n).filter(|&v| m.is_covered(v)).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in matched.iter().enumerate() {
        slot[v] = i;
    }
    let k = matched.len();
    let xv = |v: Vertex| slot[v];
    let av = |v: Vertex| k + slot[v];
    let nvars = 2 * k;
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let row = || vec![Rational::zero(); nvars];

    for &id in m.edge_ids() {
        let e = g.edge(id);
        let mut r = row();
        r[xv(e.u)] = Rational::one();
        r[xv(e.v)] = Rational::one();
        rows.push((r, g.weight_q(id)));
        let mut r = row();
        r[xv(e.u)] = Rational::one();
        r[av(e.u)] = -Rational::one();
        r[xv(e.v)] = -Rational::one();
        r[av(e.v)] = Rational::one();
        rows.push((r, Rational::zero()));
    }
    for &v in &matched {
        let alpha = alternative_raw(g, m, x, v);
        if alpha <= *tolerance {
            let mut r = row();
            r[av(v)] = Rational::one();
            rows.push((r, Rational::zero()));
        }
        for &(a, id) in g.neighbors(v) {
            if m.partner(v) == Some(a) {
                continue;
            }
            let cand = g.weight_q(id) - &x[a];
            if cand > Rational::zero() - tolerance && &alpha - &cand <= *tolerance {
                // α_v + x_a = w_va
                let mut r = row();
                r[av(v)] = Rational::one();
                if m.is_covered(a) {
                    r[xv(a)] = Rational::one();
                }
                rows.push((r, g.weight_q(id)));
            }
        }
    }

    let mut hint = vec![Rational::zero(); nvars];
    for &v in &matched {
        hint[xv(v)] = x[v].clone();
        hint[av(v)] = alternative_raw(g, m, x, v);
    }
    let sol = solve_exact(rows, nvars, &hint)?;
    let mut y = vec![Rational::zero(); n];
    for &v in &matched {
        y[v] = sol[xv(v)].clone();
    }
    let candidate = outcome.with_allocation(Allocation(y)).ok()?;
    let report = check_outcome(&candidate, &int(0), &int(0)).ok()?;
    report.balanced.then_some(candidate)
}

/// Solves `A z = b` exactly; free variables take their `hint` values.
/// `None` when the system is inconsistent.
fn solve_exact(mut rows: Vec<(Vec<Rational>, Rational)>, nvars: usize, hint: &[Rational]) -> Option<Vec<Rational>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].0[c].recip();
        for val in rows[r].0.iter_mut() {
            *val *= &inv;
        }
        rows[r].1 *= &inv;
        let (pivot_row, pivot_rhs) = rows[r].clone();
        for (i, (coef, rhs)) in rows.iter_mut().enumerate() {
            if i == r || coef[c].is_zero() {
                continue;
            }
            let f = coef[c].clone();
            for (dst, src) in coef.iter_mut().zip(&pivot_row) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
            *rhs -= &f * &pivot_rhs;
        }
        pivots.push((r, c));
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| !rhs.is_zero()) {
        return None;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut z = hint.to_vec();
    for &(row, c) in &pivots {
        let (coef, rhs) = &rows[row];
        let mut val = rhs.clone();
        for (j, a) in coef.iter().enumerate() {
            if j != c && !pivot_cols.contains(&j) && !a.is_zero() {
                val -= a * &hint[j];
            }
        }
        z[c] = val;
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run, RunConfig, Scheduler};
    use crate::graph::WeightedGraph;
    use crate::outcome::Matching;
    use crate::rational::{parse, ratio};

    #[test]
    fn p4_snaps_to_thirds() {
        let g = WeightedGraph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1), (2, 3)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(0), int(1), int(1), int(0)])).unwrap();
        let res = run(&o, &Scheduler::RoundRobin, &RunConfig::new(parse("1e-9").unwrap(), 10_000)).unwrap();
        let exact = refine_to_balanced(&res.outcome, &parse("1e-6").unwrap()).unwrap();
        assert_eq!(exact.allocation().0, vec![ratio(1, 3), ratio(2, 3), ratio(2, 3), ratio(1, 3)]);
    }

    #[test]
    fn no_balanced_outcome_gives_none() {
        let g = WeightedGraph::new(3, [(0, 1, 1), (1, 2, 5)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(0), int(1), int(0)])).unwrap();
        assert!(refine_to_balanced(&o, &parse("1e-6").unwrap()).is_none());
    }

    #[test]
    fn inconsistent_system_is_detected() {
        let rows = vec![(vec![int(1)], int(1)), (vec![int(1)], int(2))];
        assert!(solve_exact(rows, 1, &[int(0)]).is_none());
    }
}
