use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::outcome::Outcome;
use crate::rational::{format, int, Rational};

use super::classify::{classify_structure, StructureClass, StructureKind};
use super::explore::ExplorationTrail;
use super::fractional::{verify_fractional_matching, FractionalMatching};

/// Builds the fractional matching that beats `M` on the structure.
///
/// Even cycles (Lollipop, Pretzel) use `M △ C`. Every other class puts 1/2
/// on blossom edges, 1 on unmatched walk edges outside blossoms, 0 on matched
/// walk edges, and keeps the matched edges the walk never touches.
pub fn build_fractional_witness(
    trail: &ExplorationTrail,
    class: &StructureClass,
    outcome: &Outcome,
) -> Result<FractionalMatching> {
    let g = outcome.graph();
    let m = outcome.matching();
    let mut y = FractionalMatching::indicator(g, m);

    match class.kind {
        StructureKind::Capped => return Err(Error::NoWitness("no witness exists for capped trails".into())),
        StructureKind::Lollipop | StructureKind::Pretzel => {
            let cyc = class
                .even_cycle
                .as_ref()
                .ok_or_else(|| Error::Internal(format!("{} without an even cycle", class.kind)))?;
            for (i, &a) in cyc.iter().enumerate() {
                let b = cyc[(i + 1) % cyc.len()];
                let id = g.require_edge(a, b).map_err(|e| Error::Internal(e.to_string()))?;
                y.set_halves(id, if m.partner(a) == Some(b) { 0 } else { 2 });
            }
        }
        _ => {
            let in_blossom = |i: isize| class.blossoms.iter().any(|&(a, b)| a <= i && i < b);
            for (i, a, b) in trail.steps() {
                let id = g.require_edge(a, b).map_err(|e| Error::Internal(e.to_string()))?;
                let h = if in_blossom(i) {
                    1
                } else if m.partner(a) == Some(b) {
                    0
                } else {
                    2
                };
                y.set_halves(id, h);
            }
        }
    }
    Ok(y)
}

/// A trail, its class and, when one beats `M`, the fractional witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureWitness {
    pub trail: ExplorationTrail,
    pub class: StructureClass,
    pub fractional_witness: Option<FractionalMatching>,
    /// `weight(y) - weight(M)`, strictly positive when present.
    pub weight_gap: Option<Rational>,
    pub matching_weight: Rational,
    pub witness_weight: Option<Rational>,
}

impl StructureWitness {
    pub fn is_certificate(&self) -> bool {
        self.weight_gap.is_some()
    }
}

/// Classifies `trail` and builds and verifies its witness.
/// The witness is kept only when it strictly beats `M`.
pub fn structure_witness(outcome: &Outcome, trail: ExplorationTrail) -> Result<StructureWitness> {
    let g = outcome.graph();
    let class = classify_structure(&trail, outcome.matching())?;
    let matching_weight = int(outcome.matching().weight(g) as i64);
    let mut out = StructureWitness {
        trail,
        class,
        fractional_witness: None,
        weight_gap: None,
        matching_weight: matching_weight.clone(),
        witness_weight: None,
    };
    if out.class.kind == StructureKind::Capped {
        return Ok(out);
    }
    let y = build_fractional_witness(&out.trail, &out.class, outcome)?;
    let wy =
        verify_fractional_matching(g, &y).map_err(|e| Error::Internal(format!("constructed witness invalid: {e}")))?;
    let gap = &wy - &matching_weight;
    out.witness_weight = Some(wy);
    if gap.is_positive() {
        out.fractional_witness = Some(y);
        out.weight_gap = Some(gap);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrailStep {
    pub position: isize,
    pub vertex: Vertex,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub y: String,
}

/// Serializable summary of a [`StructureWitness`].
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub class: String,
    pub start: Vertex,
    pub trail: Vec<TrailStep>,
    pub left_end: String,
    pub right_end: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub even_cycle: Option<Vec<Vertex>>,
    /// Nonzero entries of `y`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<WitnessEdge>>,
    pub matching_weight: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_gap: Option<String>,
}

impl WitnessReport {
    pub fn new(w: &StructureWitness, outcome: &Outcome) -> Self {
        let t = &w.trail;
        WitnessReport {
            class: w.class.kind.name().to_string(),
            start: t.start(),
            trail: (t.left()..=t.right()).map(|i| TrailStep { position: i, vertex: t.at(i) }).collect(),
            left_end: w.class.left.to_string(),
            right_end: w.class.right.to_string(),
            even_cycle: w.class.even_cycle.clone(),
            y: w.fractional_witness.as_ref().map(|y| {
                y.support(outcome.graph())
                    .into_iter()
                    .map(|(u, v, val)| WitnessEdge { u, v, y: format(&val) })
                    .collect()
            }),
            matching_weight: format(&w.matching_weight),
            witness_weight: w.witness_weight.as_ref().filter(|_| w.is_certificate()).map(format),
            weight_gap: w.weight_gap.as_ref().map(format),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
