//! Joint constructions driven by one random stream, used to check the
//! orderings between the death-rate process, the branching random walk and
//! the selection model.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::brw::{KillBoundary, ToyModel};
use crate::evolution::Dpep;
use crate::{Error, Result, RngStream};

/// The death-rate process embedded in a branching random walk: every walk
/// particle reproduces at rate one, and a birth is also a mutation of the
/// process when the parent is one of its live types.
#[derive(Debug, Clone)]
pub struct DpepInBrw {
    walk: Vec<f64>,
    member: Vec<bool>,
    slot_of: BTreeMap<u64, usize>,
    dpep: Dpep,
    clock: f64,
}

impl DpepInBrw {
    pub fn new(dpep: Dpep) -> Self {
        let walk = dpep.xs().to_vec();
        let member = alloc::vec![true; walk.len()];
        let slot_of = walk.iter().enumerate().map(|(i, x)| (x.to_bits(), i)).collect();
        Self {
            walk,
            member,
            slot_of,
            clock: dpep.clock(),
            dpep,
        }
    }

    pub fn walk(&self) -> &[f64] {
        &self.walk
    }

    pub fn dpep(&self) -> &Dpep {
        &self.dpep
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        let n = self.walk.len();
        self.clock += rng.exponential(n as f64);
        self.dpep.set_clock(self.clock);
        let parent = rng.index(n);
        let child = self.walk[parent] + self.dpep.config().epsilon * rng.symmetric();
        let slot = self.walk.len();
        self.walk.push(child);
        self.member.push(false);
        if !self.member[parent] {
            return;
        }
        if let Some(dropped) = self.dpep.insert(child) {
            self.member[slot] = true;
            self.slot_of.insert(child.to_bits(), slot);
            for x in dropped {
                if let Some(i) = self.slot_of.remove(&x.to_bits()) {
                    self.member[i] = false;
                }
            }
        }
    }

    pub fn run_until(&mut self, t_end: f64, rng: &mut RngStream, budget: usize) -> Result<()> {
        while self.clock < t_end {
            if self.walk.len() >= budget {
                return Err(Error::BudgetExceeded {
                    budget,
                    time: self.clock,
                });
            }
            self.step(rng);
        }
        Ok(())
    }

    /// Every live type of the process is a walk particle.
    pub fn is_included(&self) -> bool {
        let mut sorted = self.walk.clone();
        sorted.sort_by(f64::total_cmp);
        self.dpep
            .xs()
            .iter()
            .all(|x| sorted.binary_search_by(|p| p.total_cmp(x)).is_ok())
    }
}

/// A branching random walk with a killed sub-population: a particle is in
/// the killed walk if it and all its ancestors stayed right of the barrier.
#[derive(Debug, Clone)]
pub struct KilledInBrw {
    walk: Vec<f64>,
    unkilled_line: Vec<bool>,
    boundary: KillBoundary,
    clock: f64,
}

impl KilledInBrw {
    pub fn new(x0: f64, boundary: KillBoundary) -> Self {
        Self {
            walk: alloc::vec![x0],
            unkilled_line: alloc::vec![x0 > boundary.position(0.0)],
            boundary,
            clock: 0.0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    fn alive(&self, i: usize, t: f64) -> bool {
        self.unkilled_line[i] && self.walk[i] > self.boundary.position(t)
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        let n = self.walk.len();
        self.clock += rng.exponential(n as f64);
        let parent = rng.index(n);
        let child = self.walk[parent] + rng.symmetric();
        let line = self.alive(parent, self.clock) && child > self.boundary.position(self.clock);
        self.walk.push(child);
        self.unkilled_line.push(line);
    }

    pub fn run_until(&mut self, t_end: f64, rng: &mut RngStream) {
        while self.clock < t_end {
            self.step(rng);
        }
    }

    /// Particles at or right of `x` in the walk and in its killed version.
    pub fn counts_at_least(&self, x: f64) -> (usize, usize) {
        let t = self.clock;
        let mut all = 0;
        let mut killed = 0;
        for i in 0..self.walk.len() {
            if self.walk[i] >= x {
                all += 1;
                if self.alive(i, t) {
                    killed += 1;
                }
            }
        }
        (all, killed)
    }
}

/// Death-rate process against the `M`-particle selection model: events at
/// rate `max(N_t, M)` pick a rank `k`; rank `k` of each system reproduces
/// (when it exists) with the same displacement.
#[derive(Debug, Clone)]
pub struct DpepOverToy {
    dpep: Dpep,
    toy: ToyModel,
    clock: f64,
}

impl DpepOverToy {
    /// Starts the selection model on the process's `m` rightmost types.
    pub fn start(dpep: Dpep, m: usize) -> Result<Self> {
        if m == 0 || dpep.len() < m {
            return Err(Error::InsufficientData {
                needed: m,
                got: dpep.len(),
            });
        }
        let toy = ToyModel::new(dpep.xs()[..m].to_vec())?;
        Ok(Self {
            clock: dpep.clock(),
            dpep,
            toy,
        })
    }

    pub fn dpep(&self) -> &Dpep {
        &self.dpep
    }

    pub fn toy(&self) -> &ToyModel {
        &self.toy
    }

    pub fn step(&mut self, rng: &mut RngStream) {
        let n = self.dpep.len();
        let m = self.toy.m();
        let total = n.max(m);
        self.clock += rng.exponential(total as f64);
        let k = rng.index(total);
        let u = rng.symmetric();
        if k < n {
            self.dpep.apply_birth(k, u);
            self.dpep.set_clock(self.clock);
        }
        if k < m {
            self.toy.apply_birth(k, u);
            self.toy.set_clock(self.clock);
        }
    }

    /// `X_i >= Y_i` for each rank present in both.
    pub fn dominates(&self) -> bool {
        self.dpep
            .xs()
            .iter()
            .zip(self.toy.positions())
            .all(|(x, y)| x >= y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::DpepConfig;
    use crate::lv::SystemParams;

    fn dpep() -> Dpep {
        Dpep::new(1.0, DpepConfig::new(SystemParams::from_growth_rate(1.0, 1.0).unwrap())).unwrap()
    }

    #[test]
    fn process_lives_inside_the_walk() {
        let mut c = DpepInBrw::new(dpep());
        let mut rng = RngStream::new(1, 0);
        for i in 1..=12 {
            c.run_until(i as f64 * 0.5, &mut rng, 200_000).unwrap();
            assert!(c.is_included());
            assert!(c.dpep().check());
        }
        assert!(c.dpep().len() > 1);
    }

    #[test]
    fn killed_counts_never_exceed_unkilled() {
        let b = KillBoundary {
            offset: 1.0,
            slope: 0.3,
        };
        let mut c = KilledInBrw::new(0.0, b);
        let mut rng = RngStream::new(2, 0);
        for i in 1..=14 {
            let t = i as f64 * 0.5;
            c.run_until(t, &mut rng);
            for x in [-5.0, 0.0, 0.4 * t] {
                let (all, killed) = c.counts_at_least(x);
                assert!(killed <= all);
            }
        }
    }

    #[test]
    fn selection_model_is_dominated() {
        let mut d = dpep();
        let mut rng = RngStream::new(3, 0);
        while d.len() < 8 {
            d.step(&mut rng);
        }
        let mut c = DpepOverToy::start(d, 8).unwrap();
        for _ in 0..20_000 {
            c.step(&mut rng);
            if c.dpep().len() >= 8 {
                assert!(c.dominates());
            }
        }
    }
}
