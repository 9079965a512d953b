use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{EventRecord, MutationRate};
use crate::lv::{check_fixed_alpha, SystemParams};
use crate::{Error, Result, RngStream};

const RESUM_EVERY: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpepConfig {
    pub params: SystemParams,
    pub epsilon: f64,
    pub rate: MutationRate,
}

impl DpepConfig {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            epsilon: 1.0,
            rate: MutationRate::PerCapita(1.0),
        }
    }
}

/// Death-rate evolution with every consumption rate equal to one, tracked
/// in log coordinates `X = -ln(delta)`. A mutant of `X` sits at
/// `X + eps U`.
#[derive(Debug, Clone)]
pub struct Dpep {
    config: DpepConfig,
    /// Strictly decreasing.
    xs: Vec<f64>,
    /// Running sum of `exp(-x)` over `xs`.
    delta_sum: f64,
    clock: f64,
    events: u64,
}

impl Dpep {
    pub fn new(x0: f64, config: DpepConfig) -> Result<Self> {
        if !check_fixed_alpha(&[x0], config.params) {
            return Err(Error::NotCoexisting);
        }
        Ok(Self {
            config,
            xs: alloc::vec![x0],
            delta_sum: (-x0).exp(),
            clock: 0.0,
            events: 0,
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_min(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn set_clock(&mut self, t: f64) {
        self.clock = t;
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn config(&self) -> &DpepConfig {
        &self.config
    }

    fn holds(&self) -> bool {
        let n = self.xs.len();
        let Some(&last) = self.xs.last() else {
            return true;
        };
        let d = (-last).exp();
        d * (self.config.params.beta() + n as f64) - self.delta_sum < self.config.params.r()
    }

    /// Inserts a mutant at `x` and drops the smallest types until the rest
    /// coexist. Returns the dropped values (in decreasing order), or `None`
    /// if `x` is already present.
    pub fn insert(&mut self, x: f64) -> Option<Vec<f64>> {
        let at = self.xs.partition_point(|&v| v > x);
        if self.xs.get(at) == Some(&x) {
            return None;
        }
        self.xs.insert(at, x);
        self.delta_sum += (-x).exp();
        let mut dropped = Vec::new();
        while !self.holds() {
            let v = self.xs.pop().unwrap();
            self.delta_sum -= (-v).exp();
            dropped.push(v);
        }
        self.events += 1;
        if self.events % RESUM_EVERY == 0 {
            self.delta_sum = self.xs.iter().map(|&v| (-v).exp()).sum();
        }
        dropped.reverse();
        Some(dropped)
    }

    /// Birth from rank `parent` with uniform draw `u` in `[-1, 1]`.
    pub fn apply_birth(&mut self, parent: usize, u: f64) -> Option<Vec<f64>> {
        let x = self.xs[parent] + self.config.epsilon * u;
        self.insert(x)
    }

    /// Waiting time to the next event.
    pub fn holding_time(&self, rng: &mut RngStream) -> f64 {
        rng.exponential(self.config.rate.total(self.xs.len()))
    }

    pub fn step(&mut self, rng: &mut RngStream) -> EventRecord {
        self.advance(f64::INFINITY, rng).unwrap()
    }

    /// Next event if it falls at or before `horizon`; otherwise the clock is
    /// moved to `horizon` and `None` is returned.
    pub fn advance(&mut self, horizon: f64, rng: &mut RngStream) -> Option<EventRecord> {
        let next = self.clock + self.holding_time(rng);
        if next > horizon {
            self.clock = horizon;
            return None;
        }
        self.clock = next;
        let parent = rng.index(self.xs.len());
        let x = loop {
            let x = self.xs[parent] + self.config.epsilon * rng.symmetric();
            if self.insert(x).is_some() {
                break x;
            }
        };
        Some(EventRecord {
            index: self.events,
            time: self.clock,
            parent,
            mutant: [x, (-x).exp()],
            survivors: self.xs.len(),
        })
    }

    /// Steps until the next event would fall after `t_end`, appending events
    /// to `log` when given.
    pub fn run_until(&mut self, t_end: f64, rng: &mut RngStream, mut log: Option<&mut Vec<EventRecord>>) {
        while let Some(ev) = self.advance(t_end, rng) {
            if let Some(log) = log.as_deref_mut() {
                log.push(ev);
            }
        }
    }

    /// Direct re-evaluation of the coexistence condition.
    pub fn check(&self) -> bool {
        check_fixed_alpha(&self.xs, self.config.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::from_growth_rate(1.0, 1.0).unwrap()
    }

    #[test]
    fn condition_holds_after_every_event() {
        let mut d = Dpep::new(1.0, DpepConfig::new(params())).unwrap();
        let mut rng = RngStream::new(12, 0);
        let mut last_max = d.x_max();
        for _ in 0..20_000 {
            let ev = d.step(&mut rng);
            assert!(d.check());
            assert_eq!(ev.survivors, d.len());
            assert!(d.x_max() >= last_max);
            last_max = d.x_max();
        }
        assert!(d.xs().windows(2).all(|w| w[0] > w[1]));
        let exact: f64 = d.xs().iter().map(|&v| (-v).exp()).sum();
        assert!((exact - d.delta_sum).abs() < 1e-9 * exact);
    }

    #[test]
    fn truncation_is_maximal() {
        let mut d = Dpep::new(1.0, DpepConfig::new(params())).unwrap();
        let mut rng = RngStream::new(13, 0);
        for _ in 0..3000 {
            let before: Vec<f64> = d.xs().to_vec();
            let parent = rng.index(before.len());
            let u = rng.symmetric();
            let dropped = d.apply_birth(parent, u).unwrap_or_default();
            if let Some(&first) = dropped.first() {
                let mut with_one_more = d.xs().to_vec();
                with_one_more.push(first);
                assert!(!check_fixed_alpha(&with_one_more, params()));
            }
        }
    }
}
