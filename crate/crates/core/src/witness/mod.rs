//! Exploration trails, their classification, fractional-matching witnesses
//! and the exhaustive oracle that decides whether a matching admits a
//! balanced outcome.

mod certify;
mod classify;
mod construct;
mod explore;
mod fractional;
mod trail_checks;

pub use certify::{certify, certify_with_margin, margin_exceeds, Certification, StartRule};
pub use classify::{classify_structure, EndShape, StructureClass, StructureKind};
pub use construct::{
    build_fractional_witness, structure_witness, StructureWitness, TrailStep, WitnessEdge, WitnessReport,
};
pub use explore::{explore, explore_forward, explore_with, ExplorationTrail, Termination, TieBreak};
pub use fractional::{
    has_balanced_outcome, max_fractional_weight, max_fractional_weight_capped, max_fractional_with_weights,
    max_weight_matching, verify_fractional_matching, FractionalMatching, FractionalOptimum, DEFAULT_ENUMERATION_CAP,
};
pub use trail_checks::{check_fixed_point_trail, check_quasi_balanced_trail, TrailRule, TrailViolation};
