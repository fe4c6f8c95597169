//! Edge-balancing dynamics on exchange networks.
//!
//! A bargaining game lives on a [`WeightedGraph`]. Given a fixed [`Matching`],
//! the [`dynamics`] repeatedly rebalance matched edges toward the Nash split of
//! their surplus. The [`witness`] module characterizes fixed points: when a
//! fixed point is not balanced, exploration finds a structure whose fractional
//! matching outweighs the matching. [`bp`] is the max-product message passing
//! phase that picks the matching in the first place.
//!
//! All arithmetic is exact ([`Rational`]).

pub mod bp;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod outcome;
pub mod rational;
pub mod status;
pub mod tight;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, Vertex, WeightedGraph};
pub use outcome::{Allocation, Matching, Outcome};
pub use rational::Rational;
pub use status::{
    alternative, check_outcome, classify_matched_edge, classify_unmatched_edge, surplus, EdgeKind, EdgeStatus,
    OutcomeReport,
};
