use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::outcome::Matching;

use super::explore::{ExplorationTrail, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Capped,
    Lollipop,
    AugmentingPath,
    Flower,
    Bicycle,
    Pretzel,
    /// Odd cycle reached from `u_0` through a stem whose first edge is matched.
    BlossomWithMatchedStem,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Capped => "capped",
            StructureKind::Lollipop => "lollipop",
            StructureKind::AugmentingPath => "augmenting-path",
            StructureKind::Flower => "flower",
            StructureKind::Bicycle => "bicycle",
            StructureKind::Pretzel => "pretzel",
            StructureKind::BlossomWithMatchedStem => "blossom-with-matched-stem",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of one end of a trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndShape {
    /// Forward-only trail: the left end is `u_0` itself.
    Anchored,
    Unmatched,
    /// Matched end vertex with zero alternative.
    Capped,
    /// The walk closes on the vertex at position `closes_at`; `len` edges.
    Cycle {
        closes_at: isize,
        len: usize,
    },
}

impl EndShape {
    fn odd_cycle(self) -> bool {
        matches!(self, EndShape::Cycle { len, .. } if len % 2 == 1)
    }

    fn even_cycle(self) -> bool {
        matches!(self, EndShape::Cycle { len, .. } if len % 2 == 0)
    }
}

impl fmt::Display for EndShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndShape::Anchored => write!(f, "anchored"),
            EndShape::Unmatched => write!(f, "unmatched"),
            EndShape::Capped => write!(f, "capped"),
            EndShape::Cycle { closes_at, len } => write!(f, "cycle(closes_at={closes_at}, len={len})"),
        }
    }
}

/// Classification of a trail plus the landmarks the witness needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureClass {
    pub kind: StructureKind,
    pub left: EndShape,
    pub right: EndShape,
    /// Lollipop and Pretzel: the even alternating cycle, as a closed vertex
    /// sequence without the repeated first vertex.
    pub even_cycle: Option<Vec<Vertex>>,
    /// Odd cycles used by the witness, as half-open step ranges `[a, b)`:
    /// step `i` is the edge between positions `i` and `i + 1`.
    pub blossoms: Vec<(isize, isize)>,
}

fn end_shape(trail: &ExplorationTrail, matching: &Matching, forward: bool) -> Result<EndShape> {
    let (term, last, pos) = if forward {
        (trail.forward_end, trail.at(trail.right()), trail.right())
    } else {
        match trail.backward_end {
            None => return Ok(EndShape::Anchored),
            Some(t) => (t, trail.at(trail.left()), trail.left()),
        }
    };
    Ok(match term {
        Termination::UnmatchedVertex => EndShape::Unmatched,
        Termination::ZeroAlternative if !matching.is_covered(last) => EndShape::Unmatched,
        Termination::ZeroAlternative => EndShape::Capped,
        Termination::RevisitedVertex { index } => {
            let len = if forward { pos - index } else { index - pos };
            if len < 3 {
                return Err(Error::Internal(format!("cycle of length {len} closing at position {index}")));
            }
            EndShape::Cycle { closes_at: index, len: len as usize }
        }
    })
}

fn check_alternation(trail: &ExplorationTrail, matching: &Matching) -> Result<()> {
    for (i, a, b) in trail.steps() {
        let matched = matching.partner(a) == Some(b);
        if matched != (i.rem_euclid(2) == 0) {
            return Err(Error::Internal(format!(
                "trail step {i} ({a}-{b}) is {} but should alternate",
                if matched { "matched" } else { "unmatched" }
            )));
        }
    }
    Ok(())
}

/// Classifies the subgraph found by exploration.
///
/// An even cycle at either end makes the trail a Lollipop even if the other
/// end is capped, so that the cycle can still serve as a witness.
pub fn classify_structure(trail: &ExplorationTrail, matching: &Matching) -> Result<StructureClass> {
    check_alternation(trail, matching)?;
    let left = end_shape(trail, matching, false)?;
    let right = end_shape(trail, matching, true)?;
    let (l, r) = (trail.left(), trail.right());

    let right_cycle = |closes_at: isize| -> Vec<Vertex> { (closes_at..r).map(|i| trail.at(i)).collect() };
    let left_cycle = |closes_at: isize| -> Vec<Vertex> { (l + 1..=closes_at).rev().map(|i| trail.at(i)).collect() };

    let mut class = StructureClass { kind: StructureKind::Capped, left, right, even_cycle: None, blossoms: Vec::new() };

    if let EndShape::Cycle { closes_at, .. } = right {
        if right.even_cycle() {
            class.kind = StructureKind::Lollipop;
            class.even_cycle = Some(right_cycle(closes_at));
            return Ok(class);
        }
    }
    if let EndShape::Cycle { closes_at, .. } = left {
        if left.even_cycle() {
            class.kind = StructureKind::Lollipop;
            class.even_cycle = Some(left_cycle(closes_at));
            return Ok(class);
        }
    }
    if left == EndShape::Capped || right == EndShape::Capped {
        return Ok(class);
    }

    let blossom_right = |c: &mut StructureClass| {
        if let EndShape::Cycle { closes_at, .. } = right {
            c.blossoms.push((closes_at, r));
        }
    };
    let blossom_left = |c: &mut StructureClass| {
        if let EndShape::Cycle { closes_at, .. } = left {
            c.blossoms.push((l, closes_at));
        }
    };

    class.kind = match (left, right) {
        (EndShape::Anchored, EndShape::Unmatched) => StructureKind::AugmentingPath,
        (EndShape::Anchored, _) if right.odd_cycle() => {
            blossom_right(&mut class);
            StructureKind::BlossomWithMatchedStem
        }
        (EndShape::Unmatched, EndShape::Unmatched) => StructureKind::AugmentingPath,
        (EndShape::Unmatched, _) if right.odd_cycle() => {
            blossom_right(&mut class);
            StructureKind::Flower
        }
        (_, EndShape::Unmatched) if left.odd_cycle() => {
            blossom_left(&mut class);
            StructureKind::Flower
        }
        (EndShape::Cycle { closes_at: pl, .. }, EndShape::Cycle { closes_at: pr, .. }) => {
            if pl < pr {
                blossom_left(&mut class);
                blossom_right(&mut class);
                StructureKind::Bicycle
            } else if pl > pr {
                // two odd cycles sharing the segment between the closure points; going
                // around both outer arcs gives an even alternating cycle
                let mut cyc: Vec<Vertex> = (pl..r).map(|i| trail.at(i)).collect();
                cyc.extend((l + 1..=pr).rev().map(|i| trail.at(i)));
                class.even_cycle = Some(cyc);
                StructureKind::Pretzel
            } else {
                return Err(Error::Internal(format!("both cycles close at position {pl}")));
            }
        }
        _ => return Err(Error::Internal(format!("unclassifiable trail ends {left} / {right}"))),
    };
    Ok(class)
}
