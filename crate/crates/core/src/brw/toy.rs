use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analysis::{slope_estimate, SlopeEstimate, TrajectorySample, DEFAULT_BURN_IN};
use crate::{Error, Result, RngStream};

/// Snapshot of the selection model: exactly `M` positions, decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyState {
    pub positions: Vec<f64>,
    pub clock: f64,
}

/// `M` particles branching at rate one each; every birth is followed by
/// deletion of the leftmost particle, possibly the newborn.
#[derive(Debug, Clone)]
pub struct ToyModel {
    positions: Vec<f64>,
    clock: f64,
    events: u64,
}

impl ToyModel {
    pub fn new(mut positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Domain("toy model needs at least one particle"));
        }
        positions.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            positions,
            clock: 0.0,
            events: 0,
        })
    }

    pub fn at_origin(m: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn leader(&self) -> f64 {
        self.positions[0]
    }

    pub fn state(&self) -> ToyState {
        ToyState {
            positions: self.positions.clone(),
            clock: self.clock,
        }
    }

    /// Birth from the particle of rank `parent` (0 = rightmost) with
    /// displacement `u`, then selection.
    pub fn apply_birth(&mut self, parent: usize, u: f64) {
        let child = self.positions[parent] + u;
        let m = self.positions.len();
        if child > self.positions[m - 1] {
            self.positions.pop();
            let at = self.positions.partition_point(|&x| x > child);
            self.positions.insert(at, child);
        }
        self.events += 1;
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        let m = self.positions.len();
        self.clock += rng.exponential(m as f64);
        let parent = rng.index(m);
        let u = rng.symmetric();
        self.apply_birth(parent, u);
    }

    pub fn set_clock(&mut self, t: f64) {
        self.clock = t;
    }

    /// Runs the event loop until the next event would fall after `t_end`.
    pub fn run_until(&mut self, t_end: f64, rng: &mut RngStream) {
        let m = self.positions.len() as f64;
        loop {
            let next = self.clock + rng.exponential(m);
            if next > t_end {
                self.clock = t_end;
                return;
            }
            self.clock = next;
            let parent = rng.index(self.positions.len());
            let u = rng.symmetric();
            self.apply_birth(parent, u);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyRun {
    pub state: ToyState,
    pub leader: TrajectorySample,
    pub speed: SlopeEstimate,
}

/// Runs the `M`-particle model from the origin, recording the leader every
/// `sample_dt` and fitting its speed after the default burn-in.
pub fn simulate_toy(m: usize, t_end: f64, sample_dt: f64, rng: &mut RngStream) -> Result<ToyRun> {
    let mut toy = ToyModel::at_origin(m)?;
    let mut leader = TrajectorySample::new();
    leader.push(0.0, 0.0)?;
    let steps = (t_end / sample_dt).floor() as usize;
    for i in 1..=steps {
        let t = i as f64 * sample_dt;
        toy.run_until(t, rng);
        leader.push(t, toy.leader())?;
    }
    let speed = slope_estimate(&leader, DEFAULT_BURN_IN)?;
    Ok(ToyRun {
        state: toy.state(),
        leader,
        speed,
    })
}
