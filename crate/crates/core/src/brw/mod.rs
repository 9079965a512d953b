//! Branching random walks and the large-deviations rate function.
//!
//! Particles give birth at rate one; a child lands at its parent's position
//! plus a uniform displacement on `[-1, 1]`; positions never move otherwise.

mod rate;
mod toy;
mod walk;

pub use rate::{lambda, optimal_tilt, phi, solve_speed_a, solve_speed_b};
pub use toy::{simulate_toy, ToyModel, ToyRun, ToyState};
pub use walk::{
    killed_growth_exponent, simulate_brw, BranchingRandomWalk, BrwConfig, BrwRun, BrwSample,
    BrwState, GrowthEstimate, KillBoundary, RunStatus, DEFAULT_BUDGET,
};
