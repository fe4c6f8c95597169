use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Vertex;
use crate::outcome::Outcome;
use crate::status::alternative_witnesses_raw;

/// Why one direction of the exploration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// The next vertex was already explored; `index` is its earlier position.
    RevisitedVertex {
        index: isize,
    },
    UnmatchedVertex,
    ZeroAlternative,
}

/// How to pick among several neighbors attaining the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    LowestId,
    Seeded(u64),
}

/// Walk `u_ℓ … u_0 … u_r` along matched edges and best alternatives.
///
/// Position `i` maps to `forward[i]` for `i ≥ 0` and `backward[-i]` for
/// `i ≤ 0` (both hold `u_0` at index 0). The edge between positions `i` and
/// `i + 1` is matched exactly when `i` is even. When a direction ends on a
/// revisit, its last entry repeats the vertex at `index`.
///
/// `backward` is `None` for forward-only (anchored) trails, which start at the
/// unsaturated endpoint of an unhappy edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationTrail {
    pub forward: Vec<Vertex>,
    pub forward_end: Termination,
    pub backward: Option<Vec<Vertex>>,
    pub backward_end: Option<Termination>,
}

impl ExplorationTrail {
    pub fn start(&self) -> Vertex {
        self.forward[0]
    }

    /// `r`, the last forward position.
    pub fn right(&self) -> isize {
        self.forward.len() as isize - 1
    }

    /// `ℓ`, the last backward position (0 for anchored trails).
    pub fn left(&self) -> isize {
        match &self.backward {
            Some(b) => -(b.len() as isize - 1),
            None => 0,
        }
    }

    pub fn is_anchored(&self) -> bool {
        self.backward.is_none()
    }

    pub fn at(&self, i: isize) -> Vertex {
        if i >= 0 {
            self.forward[i as usize]
        } else {
            self.backward.as_ref().expect("negative position on anchored trail")[(-i) as usize]
        }
    }

    /// Every vertex position from `ℓ` to `r`, in order.
    pub fn walk(&self) -> Vec<Vertex> {
        (self.left()..=self.right()).map(|i| self.at(i)).collect()
    }

    /// Consecutive pairs of the walk, as `(position, a, b)` with `a = u_i`, `b = u_{i+1}`.
    pub fn steps(&self) -> impl Iterator<Item = (isize, Vertex, Vertex)> + '_ {
        (self.left()..self.right()).map(move |i| (i, self.at(i), self.at(i + 1)))
    }
}

fn pick(options: Vec<Vertex>, tie: &mut Option<ChaCha8Rng>) -> Option<Vertex> {
    match tie {
        None => options.first().copied(),
        Some(rng) => options.choose(rng).copied(),
    }
}

/// Runs both loops of the exploration from `u0`, breaking alternative ties by lowest id.
pub fn explore(outcome: &Outcome, u0: Vertex) -> Result<ExplorationTrail> {
    explore_with(outcome, u0, false, TieBreak::LowestId)
}

/// Forward loop only, for trails that start at an unhappy edge.
pub fn explore_forward(outcome: &Outcome, u0: Vertex) -> Result<ExplorationTrail> {
    explore_with(outcome, u0, true, TieBreak::LowestId)
}

pub fn explore_with(outcome: &Outcome, u0: Vertex, forward_only: bool, tie: TieBreak) -> Result<ExplorationTrail> {
    let g = outcome.graph();
    g.check_vertex(u0)?;
    let m = outcome.matching();
    let x = &outcome.allocation().0;
    let mut rng = match tie {
        TieBreak::LowestId => None,
        TieBreak::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
    };
    let mut seen: Vec<Option<isize>> = vec![None; g.vertex_count()];

    let mut forward = Vec::new();
    let mut cur = u0;
    let mut i: isize = 0;
    let forward_end = loop {
        if let Some(index) = seen[cur] {
            forward.push(cur);
            break Termination::RevisitedVertex { index };
        }
        seen[cur] = Some(i);
        forward.push(cur);
        if i % 2 == 0 {
            match m.partner(cur) {
                None => break Termination::UnmatchedVertex,
                Some(p) => cur = p,
            }
        } else {
            match pick(alternative_witnesses_raw(g, m, x, cur), &mut rng) {
                None => break Termination::ZeroAlternative,
                Some(a) => cur = a,
            }
        }
        i += 1;
    };

    if forward_only {
        return Ok(ExplorationTrail { forward, forward_end, backward: None, backward_end: None });
    }

    let mut backward = Vec::new();
    let mut cur = u0;
    let mut i: isize = 0;
    let backward_end = loop {
        if i < 0 {
            if let Some(index) = seen[cur] {
                backward.push(cur);
                break Termination::RevisitedVertex { index };
            }
            seen[cur] = Some(i);
        }
        backward.push(cur);
        if i.rem_euclid(2) == 1 {
            match m.partner(cur) {
                None => break Termination::UnmatchedVertex,
                Some(p) => cur = p,
            }
        } else {
            match pick(alternative_witnesses_raw(g, m, x, cur), &mut rng) {
                None => break Termination::ZeroAlternative,
                Some(a) => cur = a,
            }
        }
        i -= 1;
    };

    Ok(ExplorationTrail { forward, forward_end, backward: Some(backward), backward_end: Some(backward_end) })
}
