use std::fmt;
use std::io::Write;

use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::balance::balanced_pair;
use super::potential::{potential_phi, SlackVector};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex};
use crate::outcome::{Allocation, Outcome};
use crate::rational::{format, half, pow2_inv, Rational};

/// Which matched edge the dynamics consider next.
///
/// `SeededRandom` draws uniformly over the matched edges from a ChaCha8 stream
/// seeded with `ChaCha8Rng::seed_from_u64(seed)`, so runs are bit-reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheduler {
    RoundRobin,
    SeededRandom(u64),
    /// Finite, possibly starving sequence of matched edges.
    Trace(Vec<(Vertex, Vertex)>),
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheduler::RoundRobin => write!(f, "round-robin"),
            Scheduler::SeededRandom(seed) => write!(f, "random seed={seed}"),
            Scheduler::Trace(t) => write!(f, "trace len={}", t.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    /// Every step, with potentials.
    Full,
    /// Every k-th step (k ≥ 1), with potentials.
    Every(u64),
    /// No step records and no potential evaluation.
    Off,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Updates that move `x` by at most `stop_eps / 2` (∞-norm) are skipped.
    pub stop_eps: Rational,
    pub max_steps: u64,
    pub recording: Recording,
}

impl RunConfig {
    pub fn new(stop_eps: Rational, max_steps: u64) -> Self {
        RunConfig { stop_eps, max_steps, recording: Recording::Full }
    }

    pub fn recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// A complete pass over the matched edges produced only skips.
    EpsFixedPoint,
    MaxSteps,
    TraceExhausted,
    NoMatchedEdges,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::EpsFixedPoint => "eps-fixed point",
            StopReason::MaxSteps => "max steps reached",
            StopReason::TraceExhausted => "trace exhausted",
            StopReason::NoMatchedEdges => "no matched edges",
        };
        f.write_str(s)
    }
}

/// One selection of the scheduler. For skipped steps the `after` values equal
/// the `before` values and `eps_step` is the displacement that was declined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    pub u: Vertex,
    pub v: Vertex,
    pub xu_before: Rational,
    pub xv_before: Rational,
    pub xu_after: Rational,
    pub xv_after: Rational,
    pub eps_step: Rational,
    pub phi_before: Rational,
    pub phi_after: Rational,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub n: usize,
    pub m: usize,
    pub scheduler: String,
    pub seed: Option<u64>,
    pub stop_eps: Rational,
    pub steps: Vec<StepRecord>,
}

/// A broken trajectory invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryViolation {
    pub step: u64,
    pub message: String,
}

impl Trajectory {
    /// Checks the potential invariants exactly: every applied step gains at
    /// least `eps_step · 2^-(n+m)`, and `Φ` never decreases nor exceeds `bound`.
    pub fn audit(&self, phi_bound: &Rational) -> Vec<TrajectoryViolation> {
        let scale = pow2_inv(self.n + self.m);
        let mut out = Vec::new();
        let mut last: Option<&Rational> = None;
        for r in &self.steps {
            if !r.skipped && &r.phi_after - &r.phi_before < &r.eps_step * &scale {
                out.push(TrajectoryViolation {
                    step: r.step,
                    message: format!(
                        "potential gain {} below eps_step·2^-(n+m) = {}",
                        format(&(&r.phi_after - &r.phi_before)),
                        format(&(&r.eps_step * &scale))
                    ),
                });
            }
            if r.phi_after < r.phi_before || last.is_some_and(|p| &r.phi_before < p) {
                out.push(TrajectoryViolation { step: r.step, message: "potential decreased".into() });
            }
            if &r.phi_after > phi_bound {
                out.push(TrajectoryViolation { step: r.step, message: "potential exceeds 2W".into() });
            }
            last = Some(&r.phi_after);
        }
        out
    }

    pub fn applied_steps(&self) -> usize {
        self.steps.iter().filter(|r| !r.skipped).count()
    }

    /// Writes the delimited-text form: `#` header lines, then
    /// `step,edge_u,edge_v,skipped,eps_step,phi_before,phi_after`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# scheduler={}", self.scheduler)?;
        if let Some(seed) = self.seed {
            writeln!(out, "# seed={seed}")?;
        }
        writeln!(out, "# n={} m={} stop_eps={}", self.n, self.m, format(&self.stop_eps))?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["step", "edge_u", "edge_v", "skipped", "eps_step", "phi_before", "phi_after"]).map_err(io)?;
        for r in &self.steps {
            w.write_record([
                r.step.to_string(),
                r.u.to_string(),
                r.v.to_string(),
                r.skipped.to_string(),
                format(&r.eps_step),
                format(&r.phi_before),
                format(&r.phi_after),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A trajectory row read back from the delimited-text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRow {
    pub step: u64,
    pub u: Vertex,
    pub v: Vertex,
    pub skipped: bool,
    pub eps_step: Rational,
    pub phi_before: Rational,
    pub phi_after: Rational,
}

pub fn read_trajectory_csv<R: std::io::Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("trajectory row {}: {e}", i + 1)))?;
        if rec.len() != 7 {
            return Err(Error::Parse(format!("trajectory row {}: expected 7 fields, got {}", i + 1, rec.len())));
        }
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize, name: &str| -> Result<u64> {
            field(k).parse().map_err(|_| Error::Parse(format!("trajectory row {}: bad {name}", i + 1)))
        };
        rows.push(TrajectoryRow {
            step: num(0, "step")?,
            u: num(1, "edge_u")? as Vertex,
            v: num(2, "edge_v")? as Vertex,
            skipped: field(3)
                .parse()
                .map_err(|_| Error::Parse(format!("trajectory row {}: bad skipped flag", i + 1)))?,
            eps_step: crate::rational::parse(field(4))?,
            phi_before: crate::rational::parse(field(5))?,
            phi_after: crate::rational::parse(field(6))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub trajectory: Trajectory,
    pub stop: StopReason,
    pub steps: u64,
    pub applied: u64,
}

enum Picker {
    RoundRobin(usize),
    Random(Box<ChaCha8Rng>),
    Trace(Vec<EdgeId>, usize),
}

/// Step-by-step driver for the edge-balancing dynamics.
///
/// [`run`] wraps this; tests use it to observe intermediate states.
pub struct Dynamics {
    outcome: Outcome,
    x: Vec<Rational>,
    matched: Vec<EdgeId>,
    picker: Picker,
    half_eps: Rational,
    track_phi: bool,
    phi: Rational,
    step: u64,
    /// Matched-edge positions skipped since the last applied update.
    skipped_since: Vec<bool>,
    skipped_count: usize,
}

impl Dynamics {
    pub fn new(outcome: &Outcome, scheduler: &Scheduler, stop_eps: &Rational, track_phi: bool) -> Result<Self> {
        outcome.validate()?;
        if stop_eps.is_negative() {
            return Err(Error::Input("stop_eps must be nonnegative".into()));
        }
        let g = outcome.graph();
        let matched = outcome.matching().edge_ids().to_vec();
        let picker = match scheduler {
            Scheduler::RoundRobin => Picker::RoundRobin(0),
            Scheduler::SeededRandom(seed) => Picker::Random(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
            Scheduler::Trace(pairs) => {
                let mut ids = Vec::with_capacity(pairs.len());
                for &(a, b) in pairs {
                    let id = g.require_edge(a, b)?;
                    if !outcome.matching().contains(g, id) {
                        return Err(Error::Input(format!("trace edge {a}-{b} is not in the matching")));
                    }
                    ids.push(id);
                }
                Picker::Trace(ids, 0)
            }
        };
        let x = outcome.allocation().0.clone();
        let phi = if track_phi { potential_phi(&SlackVector::from_raw(g, &x)) } else { Rational::zero() };
        Ok(Dynamics {
            outcome: outcome.clone(),
            skipped_since: vec![false; matched.len()],
            x,
            matched,
            picker,
            half_eps: half(stop_eps),
            track_phi,
            phi,
            step: 0,
            skipped_count: 0,
        })
    }

    pub fn allocation(&self) -> &[Rational] {
        &self.x
    }

    pub fn phi(&self) -> &Rational {
        &self.phi
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// True once every matched edge has been skipped since the last applied update.
    pub fn at_eps_fixed_point(&self) -> bool {
        !self.matched.is_empty() && self.skipped_count == self.matched.len()
    }

    pub fn outcome(&self) -> Outcome {
        Outcome::from_parts_unchecked(
            self.outcome.graph_arc().clone(),
            self.outcome.matching_arc().clone(),
            Allocation(self.x.clone()),
        )
    }

    fn pick(&mut self) -> Option<usize> {
        let k = self.matched.len();
        if k == 0 {
            return None;
        }
        match &mut self.picker {
            Picker::RoundRobin(next) => {
                let i = *next;
                *next = (i + 1) % k;
                Some(i)
            }
            Picker::Random(rng) => Some(rng.gen_range(0..k)),
            Picker::Trace(ids, pos) => {
                let id = *ids.get(*pos)?;
                *pos += 1;
                self.matched.iter().position(|&m| m == id)
            }
        }
    }

    /// Advances one scheduler selection. `None` when there is nothing left to
    /// select (no matched edges, or trace exhausted).
    pub fn next_step(&mut self) -> Option<StepRecord> {
        let slot = self.pick()?;
        let g = self.outcome.graph_arc().clone();
        let id = self.matched[slot];
        let e = *g.edge(id);
        let w = g.weight_q(id);
        let (nu, nv) = balanced_pair(&g, self.outcome.matching(), &self.x, e.u, e.v, &w);
        let eps_step = (&nu - &self.x[e.u]).abs();
        let skipped = eps_step <= self.half_eps;
        let xu_before = self.x[e.u].clone();
        let xv_before = self.x[e.v].clone();
        let phi_before = self.phi.clone();
        if skipped {
            if !self.skipped_since[slot] {
                self.skipped_since[slot] = true;
                self.skipped_count += 1;
            }
        } else {
            self.x[e.u] = nu;
            self.x[e.v] = nv;
            if self.skipped_count > 0 {
                self.skipped_since.iter_mut().for_each(|s| *s = false);
                self.skipped_count = 0;
            }
            if self.track_phi {
                self.phi = potential_phi(&SlackVector::from_raw(&g, &self.x));
            }
        }
        let rec = StepRecord {
            step: self.step,
            u: e.u,
            v: e.v,
            xu_before,
            xv_before,
            xu_after: self.x[e.u].clone(),
            xv_after: self.x[e.v].clone(),
            eps_step,
            phi_before,
            phi_after: self.phi.clone(),
            skipped,
        };
        self.step += 1;
        Some(rec)
    }
}

/// Runs the dynamics until an ε-fixed point, `max_steps`, or trace exhaustion.
pub fn run(outcome: &Outcome, scheduler: &Scheduler, config: &RunConfig) -> Result<RunResult> {
    let track = config.recording != Recording::Off;
    let mut dyn_ = Dynamics::new(outcome, scheduler, &config.stop_eps, track)?;
    let seed = match scheduler {
        Scheduler::SeededRandom(s) => Some(*s),
        _ => None,
    };
    let mut trajectory = Trajectory {
        n: outcome.graph().vertex_count(),
        m: outcome.graph().edge_count(),
        scheduler: scheduler.to_string(),
        seed,
        stop_eps: config.stop_eps.clone(),
        steps: Vec::new(),
    };
    let mut applied = 0;
    let stop = if outcome.matching().is_empty() {
        StopReason::NoMatchedEdges
    } else {
        loop {
            if dyn_.steps_taken() >= config.max_steps {
                break StopReason::MaxSteps;
            }
            let Some(rec) = dyn_.next_step() else {
                break StopReason::TraceExhausted;
            };
            if !rec.skipped {
                applied += 1;
            }
            match config.recording {
                Recording::Full => trajectory.steps.push(rec),
                Recording::Every(k) if rec.step % k.max(1) == 0 => trajectory.steps.push(rec),
                _ => {}
            }
            if dyn_.at_eps_fixed_point() {
                break StopReason::EpsFixedPoint;
            }
        }
    };
    Ok(RunResult { outcome: dyn_.outcome(), trajectory, stop, steps: dyn_.steps_taken(), applied })
}
