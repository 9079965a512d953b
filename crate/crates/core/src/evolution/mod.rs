//! Seeded event-driven evolutionary processes.
//!
//! Each process keeps only the currently coexisting set of types. A mutant
//! is drawn near a uniformly chosen parent, the community is re-solved in
//! closed form, and whatever does not coexist is dropped.

mod apep;
mod canonical;
mod dpep;
mod predator_ep;
mod prey_ep;

pub use apep::{fixed_delta_prefix, Apep, ApepConfig};
pub use canonical::{canonical_ode, CANONICAL_DRIFT};
pub use dpep::{Dpep, DpepConfig};
pub use predator_ep::{PredatorEp, PredatorEpConfig};
pub use prey_ep::{PreyEp, PreyEpConfig, PreyEpState};

/// How fast mutations arrive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MutationRate {
    /// Fixed total rate, independent of how many types are alive.
    Total(f64),
    /// Rate per live type.
    PerCapita(f64),
}

impl MutationRate {
    pub fn total(&self, types: usize) -> f64 {
        match *self {
            MutationRate::Total(r) => r,
            MutationRate::PerCapita(r) => r * types as f64,
        }
    }
}

/// One mutation event. `parent` indexes the ordered list as it stood before
/// the event; `survivors` is the list length afterwards. Index 0 is used for
/// the founding type, with `parent == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub index: u64,
    pub time: f64,
    pub parent: usize,
    pub mutant: [f64; 2],
    pub survivors: usize,
}
