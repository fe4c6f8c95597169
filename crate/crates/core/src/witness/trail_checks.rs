//! Inequalities that exploration trails must satisfy, checked exactly.
//!
//! [`check_fixed_point_trail`] covers forward trails started at the zero
//! endpoint of a saturated unhappy edge of an exact fixed point on a maximum
//! matching. [`check_quasi_balanced_trail`] covers full trails started at a
//! matched endpoint of the most violated unmatched edge of an
//! ε-quasi-balanced outcome.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::rational::{format, int, Rational};
use crate::status::alternative_raw;

use super::explore::ExplorationTrail;

/// Which trail inequality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrailRule {
    /// odd `ℓ`: `x_ℓ + Σ w(2i-1, 2i) > x_{2j+1} + Σ w(2i, 2i+1)`
    OddPrefixExceeds,
    OddPositive,
    /// odd `ℓ`: `x_ℓ - α_ℓ ≤ x_{ℓ-1} - α_{ℓ-1}`
    OddDropBounded,
    OddBelowAlpha,
    /// odd `ℓ`: `α_ℓ - x_ℓ` is at least every earlier odd gap
    OddGapGrows,
    EvenEdgeUnsaturated,
    EvenBelowAlpha,
    /// even `ℓ`: `x_ℓ + Σ w(2i, 2i+1) < x_{2j} + Σ w(2i-1, 2i)`
    EvenPrefixBelow,
    UnmatchedSlack,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailViolation {
    pub rule: TrailRule,
    pub position: isize,
    pub detail: String,
}

struct Trail<'a> {
    outcome: &'a Outcome,
    trail: &'a ExplorationTrail,
}

impl Trail<'_> {
    fn x(&self, i: isize) -> &Rational {
        self.outcome.x(self.trail.at(i))
    }

    fn alpha(&self, i: isize) -> Rational {
        let o = self.outcome;
        alternative_raw(o.graph(), o.matching(), &o.allocation().0, self.trail.at(i))
    }

    fn w(&self, a: isize, b: isize) -> Rational {
        let g = self.outcome.graph();
        let id = g.edge_id(self.trail.at(a), self.trail.at(b)).expect("consecutive trail vertices are adjacent");
        g.weight_q(id)
    }
}

/// Checks the fixed-point trail inequalities at every position `0 ≤ ℓ ≤ r`.
/// `OddPrefixExceeds` is only asserted for `ℓ ≥ 3`; for `ℓ = 1` its range
/// of `j` is empty. `EvenPrefixBelow` carries `x_{2j}` on the right, which is
/// zero for `j = 0`; without it the bound fails at `j = ℓ/2 - 1` whenever
/// `x_{ℓ-2} > 0`.
///
/// Preconditions: the trail is forward-only and `u_0 u_1` is matched with
/// `x_0 = 0`, `x_1 = w_{0,1}`.
pub fn check_fixed_point_trail(outcome: &Outcome, trail: &ExplorationTrail) -> Result<Vec<TrailViolation>> {
    if !trail.is_anchored() || trail.right() < 1 {
        return Err(Error::Input("fixed-point checks need a forward trail with a matched first edge".into()));
    }
    let t = Trail { outcome, trail };
    if !t.x(0).is_zero() || t.x(1) != &t.w(0, 1) {
        return Err(Error::Input("the first trail edge is not saturated towards u_1".into()));
    }
    let mut out = Vec::new();
    let mut fail =
        |rule: TrailRule, position: isize, detail: String| out.push(TrailViolation { rule, position, detail });

    for l in 0..=trail.right() {
        let xl = t.x(l).clone();
        let al = t.alpha(l);
        if l % 2 == 1 {
            let k = l / 2;
            if l >= 3 {
                for j in 0..k {
                    let lhs: Rational = &xl + (j + 1..=k).map(|i| t.w(2 * i - 1, 2 * i)).sum::<Rational>();
                    let rhs: Rational = t.x(2 * j + 1) + (j + 1..=k).map(|i| t.w(2 * i, 2 * i + 1)).sum::<Rational>();
                    if lhs <= rhs {
                        fail(TrailRule::OddPrefixExceeds, l, format!("j={j}: {} <= {}", format(&lhs), format(&rhs)));
                    }
                }
            }
            if !(xl > Rational::zero()) {
                fail(TrailRule::OddPositive, l, format!("x = {}", format(&xl)));
            }
            let prev = t.x(l - 1) - t.alpha(l - 1);
            if &xl - &al > prev {
                fail(TrailRule::OddDropBounded, l, format!("{} > {}", format(&(&xl - &al)), format(&prev)));
            }
            if al <= xl {
                fail(TrailRule::OddBelowAlpha, l, format!("alpha {} <= x {}", format(&al), format(&xl)));
            }
            let here = &al - &xl;
            for lp in (1..l).step_by(2) {
                let there = t.alpha(lp) - t.x(lp);
                if here < there {
                    fail(TrailRule::OddGapGrows, l, format!("vs {lp}: {} < {}", format(&here), format(&there)));
                }
            }
        } else {
            if l >= 2 {
                let s = t.x(l - 1) + &xl;
                let w = t.w(l - 1, l);
                if w <= s {
                    fail(TrailRule::EvenEdgeUnsaturated, l, format!("w {} <= {}", format(&w), format(&s)));
                }
                if al <= xl {
                    fail(TrailRule::EvenBelowAlpha, l, format!("alpha {} <= x {}", format(&al), format(&xl)));
                }
            }
            let half = l / 2;
            for j in 0..half {
                let lhs: Rational = &xl + (j..half).map(|i| t.w(2 * i, 2 * i + 1)).sum::<Rational>();
                let rhs: Rational = t.x(2 * j) + (j + 1..=half).map(|i| t.w(2 * i - 1, 2 * i)).sum::<Rational>();
                if lhs >= rhs {
                    fail(TrailRule::EvenPrefixBelow, l, format!("j={j}: {} >= {}", format(&lhs), format(&rhs)));
                }
            }
        }
    }
    Ok(out)
}

/// Every unmatched trail edge `ab` must satisfy
/// `x_a + x_b ≤ w_ab - δ + (n - 1)ε`, where `δ` is the largest unmatched
/// violation and `ε` the imbalance bound. Returns the offending steps.
pub fn check_quasi_balanced_trail(
    outcome: &Outcome,
    trail: &ExplorationTrail,
    eps: &Rational,
    delta: &Rational,
) -> Vec<TrailViolation> {
    let t = Trail { outcome, trail };
    let n1 = int(outcome.graph().vertex_count() as i64 - 1);
    let mut out = Vec::new();
    for (i, a, b) in trail.steps() {
        if outcome.matching().partner(a) == Some(b) {
            continue;
        }
        let lhs = outcome.x(a) + outcome.x(b);
        let rhs = t.w(i, i + 1) - delta + &n1 * eps;
        if lhs > rhs {
            out.push(TrailViolation {
                rule: TrailRule::UnmatchedSlack,
                position: i,
                detail: format!("{} > {}", format(&lhs), format(&rhs)),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::outcome::{Allocation, Matching};
    use crate::rational::ratio;
    use crate::witness::explore::{explore, explore_forward};

    #[test]
    fn abc_fixed_point_passes() {
        let g = WeightedGraph::new(3, [(0, 1, 1), (1, 2, 2)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(0), int(1), int(0)])).unwrap();
        let t = explore_forward(&o, 0).unwrap();
        assert_eq!(check_fixed_point_trail(&o, &t).unwrap(), vec![]);
    }

    #[test]
    fn unsaturated_start_is_rejected() {
        let g = WeightedGraph::new(2, [(0, 1, 2)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(1), int(1)])).unwrap();
        assert!(check_fixed_point_trail(&o, &explore_forward(&o, 0).unwrap()).is_err());
    }

    #[test]
    fn violations_reported_off_hypothesis() {
        // x_1 + x_2 = w_12 exactly, so the strict inequality fails at ℓ = 2
        let g = WeightedGraph::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1), (2, 3)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![int(0), int(1), int(0), int(1)])).unwrap();
        let t = explore_forward(&o, 0).unwrap();
        let v = check_fixed_point_trail(&o, &t).unwrap();
        assert!(
            v.iter().any(|e| e.rule == TrailRule::OddBelowAlpha || e.rule == TrailRule::EvenEdgeUnsaturated),
            "{v:?}"
        );
    }

    #[test]
    fn quasi_balanced_trail_bound() {
        // unit triangle, M = {01}, x = (1/2, 1/2, 0): δ = 1/2, ε = 0
        let g = WeightedGraph::new(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let m = Matching::from_pairs(&g, [(0, 1)]).unwrap();
        let o = Outcome::new(g, m, Allocation(vec![ratio(1, 2), ratio(1, 2), int(0)])).unwrap();
        let t = explore(&o, 0).unwrap();
        assert!(check_quasi_balanced_trail(&o, &t, &int(0), &ratio(1, 2)).is_empty());
        assert!(!check_quasi_balanced_trail(&o, &t, &int(0), &int(1)).is_empty());
    }
}
