//! Edge-balancing dynamics and the sorted-slack potential.

mod balance;
mod potential;
mod refine;
mod run;

pub use balance::balance_edge;
pub use potential::{phi_upper_bound, potential_phi, slack_vector, SlackVector};
pub use refine::refine_to_balanced;
pub use run::{
    read_trajectory_csv, run, Dynamics, Recording, RunConfig, RunResult, Scheduler, StepRecord, StopReason, Trajectory,
    TrajectoryRow, TrajectoryViolation,
};
