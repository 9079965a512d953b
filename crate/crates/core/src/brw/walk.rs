#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;


use crate::analysis::{slope_estimate, TrajectorySample};
use crate::{Error, Result, RngStream};

pub const DEFAULT_BUDGET: usize = 1_000_000;
const DEAD: u32 = u32::MAX;

/// Absorbing barrier at `-offset + slope * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillBoundary {
    pub offset: f64,
    pub slope: f64,
}

impl KillBoundary {
    pub fn position(&self, t: f64) -> f64 {
        -self.offset + self.slope * t
    }

    fn hitting_time(&self, x: f64) -> f64 {
        if self.slope > 0.0 {
            (x + self.offset) / self.slope
        } else if x < -self.offset {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwConfig {
    pub boundary: Option<KillBoundary>,
    /// Largest live population allowed before a run is cut short.
    pub budget: usize,
}

impl Default for BrwConfig {
    fn default() -> Self {
        Self {
            boundary: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Kill {
    time: f64,
    id: u32,
}

impl PartialEq for Kill {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Kill {}
impl PartialOrd for Kill {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Kill {
    // reversed: BinaryHeap pops the earliest kill first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.id.cmp(&self.id))
    }
}

/// Population snapshot. `len == births - kills + initial`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrwState {
    pub positions: Vec<f64>,
    pub clock: f64,
    pub births: u64,
    pub kills: u64,
}

/// Continuous-time BRW, optionally killed at a moving linear barrier.
/// Kills are scheduled exactly: each particle's hitting time is known at
/// birth and competes with the next birth.
#[derive(Debug, Clone)]
pub struct BranchingRandomWalk {
    positions: Vec<f64>,
    ids: Vec<u32>,
    slot_of: Vec<u32>,
    kills_due: BinaryHeap<Kill>,
    config: BrwConfig,
    clock: f64,
    births: u64,
    kills: u64,
    initial: u64,
    max: f64,
}

impl BranchingRandomWalk {
    pub fn new(initial: &[f64], config: BrwConfig) -> Self {
        let mut walk = Self {
            positions: Vec::new(),
            ids: Vec::new(),
            slot_of: Vec::new(),
            kills_due: BinaryHeap::new(),
            config,
            clock: 0.0,
            births: 0,
            kills: 0,
            initial: initial.len() as u64,
            max: f64::NEG_INFINITY,
        };
        for &x in initial {
            walk.insert(x);
        }
        walk.drain_kills(0.0);
        walk
    }

    fn insert(&mut self, x: f64) {
        let id = self.slot_of.len() as u32;
        self.slot_of.push(self.positions.len() as u32);
        self.positions.push(x);
        self.ids.push(id);
        if x > self.max {
            self.max = x;
        }
        if let Some(b) = self.config.boundary {
            let time = b.hitting_time(x);
            if time.is_finite() {
                self.kills_due.push(Kill { time, id });
            }
        }
    }

    fn remove(&mut self, id: u32) {
        let slot = self.slot_of[id as usize] as usize;
        self.slot_of[id as usize] = DEAD;
        self.positions.swap_remove(slot);
        self.ids.swap_remove(slot);
        if let Some(&moved) = self.ids.get(slot) {
            self.slot_of[moved as usize] = slot as u32;
        }
        self.kills += 1;
    }

    fn drain_kills(&mut self, upto: f64) {
        while let Some(k) = self.kills_due.peek().copied() {
            if k.time > upto {
                break;
            }
            self.kills_due.pop();
            self.remove(k.id);
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn births(&self) -> u64 {
        self.births
    }

    pub fn kills(&self) -> u64 {
        self.kills
    }

    pub fn config(&self) -> &BrwConfig {
        &self.config
    }

    /// Rightmost live position. The barrier removes particles from the
    /// left, so the running maximum stays live until extinction.
    pub fn max(&self) -> Option<f64> {
        (!self.is_empty()).then_some(self.max)
    }

    pub fn min(&self) -> Option<f64> {
        self.positions.iter().copied().reduce(f64::min)
    }

    pub fn count_at_least(&self, x: f64) -> usize {
        self.positions.iter().filter(|&&p| p >= x).count()
    }

    pub fn state(&self) -> BrwState {
        BrwState {
            positions: self.positions.clone(),
            clock: self.clock,
            births: self.births,
            kills: self.kills,
        }
    }

    /// Advances to `t_end`. The population is left as it was when the
    /// budget was hit, with the clock at the offending birth time.
    pub fn run_until(&mut self, t_end: f64, rng: &mut RngStream) -> Result<()> {
        while self.clock < t_end {
            let n = self.positions.len();
            if n == 0 {
                self.clock = t_end;
                return Ok(());
            }
            let birth_at = self.clock + rng.exponential(n as f64);
            let next_kill = self.kills_due.peek().map_or(f64::INFINITY, |k| k.time);
            if next_kill <= birth_at.min(t_end) {
                self.clock = next_kill.max(self.clock);
                self.drain_kills(self.clock);
                continue;
            }
            if birth_at > t_end {
                self.clock = t_end;
                return Ok(());
            }
            self.clock = birth_at;
            if n >= self.config.budget {
                return Err(Error::BudgetExceeded {
                    budget: self.config.budget,
                    time: self.clock,
                });
            }
            let parent = self.positions[rng.index(n)];
            let child = parent + rng.symmetric();
            self.births += 1;
            self.insert(child);
            self.drain_kills(self.clock);
        }
        Ok(())
    }

    /// Counts are conserved: `len == initial + births - kills`.
    pub fn check_conservation(&self) -> bool {
        self.positions.len() as u64 + self.kills == self.initial + self.births
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwSample {
    pub t: f64,
    pub count: usize,
    pub max: f64,
    pub min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Extinct,
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct BrwRun {
    pub state: BrwState,
    pub samples: Vec<BrwSample>,
    pub status: RunStatus,
}

/// Runs one walk from a single particle at `x0`, sampling at each of
/// `sample_times` (increasing, capped at `t_end`).
pub fn simulate_brw(
    x0: f64,
    t_end: f64,
    config: BrwConfig,
    sample_times: &[f64],
    rng: &mut RngStream,
) -> BrwRun {
    let mut walk = BranchingRandomWalk::new(&[x0], config);
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut status = RunStatus::Completed;
    for t in sample_times
        .iter()
        .copied()
        .filter(|&t| t <= t_end)
        .chain(core::iter::once(t_end))
    {
        if walk.run_until(t, rng).is_err() {
            status = RunStatus::BudgetExceeded;
            break;
        }
        if walk.is_empty() {
            status = RunStatus::Extinct;
            break;
        }
        if samples.last().map_or(true, |s: &BrwSample| t > s.t) {
            samples.push(BrwSample {
                t,
                count: walk.len(),
                max: walk.max().unwrap_or(f64::NAN),
                min: walk.min().unwrap_or(f64::NAN),
            });
        }
    }
    BrwRun {
        state: walk.state(),
        samples,
        status,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    /// Least-squares slope of `log E[Z_t]` after burn-in, the mean taken
    /// over replicates still alive at the final time.
    pub exponent: f64,
    pub stderr: f64,
    /// `(1/t) log E[Z_t]` at the final time.
    pub ratio: f64,
    pub survivors: usize,
    pub replicates: usize,
    pub extinction_fraction: f64,
}

/// Growth exponent of `Z_t = #{particles at >= c t}` for the walk killed at
/// `-offset + gamma t`, started from one particle at the origin.
#[allow(clippy::too_many_arguments)]
pub fn killed_growth_exponent(
    gamma: f64,
    c: f64,
    offset: f64,
    t_end: f64,
    sample_dt: f64,
    burn_in: f64,
    replicates: usize,
    seed: u64,
    budget: usize,
) -> Result<GrowthEstimate> {
    if !(c > gamma) || !(gamma >= 0.0) || !(sample_dt > 0.0) {
        return Err(Error::Domain("need 0 <= gamma < c and a positive sample step"));
    }
    let steps = (t_end / sample_dt).round() as usize;
    let times: Vec<f64> = (1..=steps).map(|i| i as f64 * sample_dt).collect();
    let config = BrwConfig {
        boundary: Some(KillBoundary { offset, slope: gamma }),
        budget,
    };
    let mut totals = alloc::vec![0.0; times.len()];
    let mut survivors = 0;
    for r in 0..replicates {
        let mut rng = RngStream::replicate(seed, r as u64);
        let mut walk = BranchingRandomWalk::new(&[0.0], config);
        let mut counts = Vec::with_capacity(times.len());
        for &t in &times {
            walk.run_until(t, &mut rng)?;
            if walk.is_empty() {
                break;
            }
            counts.push(walk.count_at_least(c * t) as f64);
        }
        if counts.len() == times.len() {
            survivors += 1;
            for (acc, z) in totals.iter_mut().zip(counts) {
                *acc += z;
            }
        }
    }
    if survivors == 0 {
        return Err(Error::Extinct { replicates });
    }
    let mut sample = TrajectorySample::new();
    for (&t, &z) in times.iter().zip(&totals) {
        if z > 0.0 {
            sample.push(t, (z / survivors as f64).ln())?;
        }
    }
    let fit = slope_estimate(&sample, burn_in)?;
    let last = (totals[totals.len() - 1] / survivors as f64).ln();
    Ok(GrowthEstimate {
        exponent: fit.slope,
        stderr: fit.stderr,
        ratio: last / t_end,
        survivors,
        replicates,
        extinction_fraction: 1.0 - survivors as f64 / replicates as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unkilled_walk_conserves_and_grows() {
        let mut rng = RngStream::new(5, 0);
        let mut walk = BranchingRandomWalk::new(&[0.0], BrwConfig::default());
        walk.run_until(3.0, &mut rng).unwrap();
        assert!(walk.check_conservation());
        assert_eq!(walk.kills(), 0);
        assert!(walk.len() > 1);
        let max = walk.positions().iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(walk.max(), Some(max));
    }

    #[test]
    fn barrier_kills_everything_left_of_it() {
        let mut rng = RngStream::new(9, 0);
        let b = KillBoundary {
            offset: 2.0,
            slope: 0.5,
        };
        let mut walk = BranchingRandomWalk::new(
            &[0.0],
            BrwConfig {
                boundary: Some(b),
                budget: DEFAULT_BUDGET,
            },
        );
        for i in 1..=30 {
            let t = i as f64 * 0.25;
            walk.run_until(t, &mut rng).unwrap();
            assert!(walk.positions().iter().all(|&x| x > b.position(t)));
            assert!(walk.check_conservation());
        }
    }

    #[test]
    fn initial_particles_behind_barrier_are_removed() {
        let b = KillBoundary {
            offset: 1.0,
            slope: 0.0,
        };
        let walk = BranchingRandomWalk::new(
            &[-2.0, 0.0],
            BrwConfig {
                boundary: Some(b),
                budget: 10,
            },
        );
        assert_eq!(walk.len(), 1);
        assert_eq!(walk.kills(), 1);
    }

    #[test]
    fn budget_stops_the_run() {
        let mut rng = RngStream::new(1, 0);
        let run = simulate_brw(
            0.0,
            50.0,
            BrwConfig {
                boundary: None,
                budget: 1000,
            },
            &[1.0, 2.0],
            &mut rng,
        );
        assert_eq!(run.status, RunStatus::BudgetExceeded);
        assert_eq!(run.state.positions.len(), 1000);
        assert!(run.state.clock < 50.0);
    }

    #[test]
    fn samples_report_extremes() {
        let mut rng = RngStream::new(3, 0);
        let run = simulate_brw(0.0, 4.0, BrwConfig::default(), &[1.0, 2.0, 3.0], &mut rng);
        assert_eq!(run.status, RunStatus::Completed);
        assert_eq!(run.samples.len(), 4);
        for s in &run.samples {
            assert!(s.min <= s.max && s.count >= 1);
        }
        assert!(run.samples.windows(2).all(|w| w[0].count <= w[1].count));
    }
}
