//! Evolution in Lotka-Volterra predator-prey systems.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerics:
//!
//! * [`lv`]: closed-form equilibria, invadability algebra, coexistence
//!   criteria and an adaptive Runge-Kutta integrator for the ODE system.
//! * [`evolution`]: the mutation-driven processes (prey, two-dimensional
//!   predator, alpha-only and delta-only predator processes) and the
//!   canonical equation.
//! * [`brw`]: branching random walks (optionally killed at a moving
//!   boundary), the `M`-particle branching-selection model, and the
//!   large-deviations rate function with the front speeds `a` and `b`.
//! * [`coupling`]: joint constructions used to check the domination
//!   relations between the processes.
//! * [`analysis`]: estimators that turn trajectories into limit quantities.
//!
//! File formats, configuration and the command line live in the `ppevo`
//! crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod brw;
pub mod coupling;
mod error;
pub mod evolution;
mod linalg;
pub mod lv;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RngStream;
