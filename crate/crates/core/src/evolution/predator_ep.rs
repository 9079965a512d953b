use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{EventRecord, MutationRate};
use crate::lv::predator::{largest_prefix, ratio_insertion_point};
use crate::lv::{PredatorTrait, SystemParams};
use crate::{Error, Result, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorEpConfig {
    pub epsilon: f64,
    pub params: SystemParams,
    pub rate: MutationRate,
}

impl PredatorEpConfig {
    pub fn new(epsilon: f64, params: SystemParams) -> Self {
        Self {
            epsilon,
            params,
            rate: MutationRate::Total(1.0),
        }
    }
}

/// Predators evolving in both consumption and death rate against a single
/// prey. `alpha' = alpha + eps U1`, `delta' = delta exp(eps U2)`.
#[derive(Debug, Clone)]
pub struct PredatorEp {
    config: PredatorEpConfig,
    predators: Vec<PredatorTrait>,
    clock: f64,
    events: u64,
}

impl PredatorEp {
    pub fn new(founder: PredatorTrait, config: PredatorEpConfig) -> Result<Self> {
        if !(config.epsilon > 0.0) {
            return Err(Error::Domain("mutation radius must be positive"));
        }
        if largest_prefix(&[founder], config.params) != 1 {
            return Err(Error::NotCoexisting);
        }
        Ok(Self {
            config,
            predators: alloc::vec![founder],
            clock: 0.0,
            events: 0,
        })
    }

    /// Coexisting predators in increasing `ell`.
    pub fn predators(&self) -> &[PredatorTrait] {
        &self.predators
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn config(&self) -> &PredatorEpConfig {
        &self.config
    }

    pub fn step(&mut self, rng: &mut RngStream) -> EventRecord {
        let n = self.predators.len();
        self.clock += rng.exponential(self.config.rate.total(n));
        let parent = rng.index(n);
        let p = self.predators[parent];
        let eps = self.config.epsilon;
        let (mutant, at) = loop {
            let alpha = p.alpha() + eps * rng.symmetric();
            let delta = p.delta() * (eps * rng.symmetric()).exp();
            let Ok(m) = PredatorTrait::new(alpha, delta) else {
                continue;
            };
            let at = ratio_insertion_point(&self.predators, &m);
            let tie = |i: usize| self.predators.get(i).is_some_and(|q| q.ell() == m.ell());
            if at > 0 && tie(at - 1) || tie(at) {
                continue;
            }
            break (m, at);
        };
        self.predators.insert(at, mutant);
        let keep = largest_prefix(&self.predators, self.config.params);
        self.predators.truncate(keep);
        self.events += 1;
        EventRecord {
            index: self.events,
            time: self.clock,
            parent,
            mutant: [mutant.alpha(), mutant.delta()],
            survivors: self.predators.len(),
        }
    }

    pub fn mean_alpha(&self) -> f64 {
        self.predators.iter().map(|p| p.alpha()).sum::<f64>() / self.predators.len() as f64
    }

    pub fn mean_log_ell(&self) -> f64 {
        self.predators.iter().map(|p| p.ell().ln()).sum::<f64>() / self.predators.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_config() -> PredatorEpConfig {
        PredatorEpConfig::new(0.01, SystemParams::from_growth_rate(1.0, 1.0).unwrap())
    }

    #[test]
    fn stored_set_is_the_coexisting_set() {
        let cfg = figure_config();
        let mut ep = PredatorEp::new(PredatorTrait::new(3.0, 0.45).unwrap(), cfg).unwrap();
        let mut rng = RngStream::new(21, 0);
        for _ in 0..2000 {
            let ev = ep.step(&mut rng);
            let preds = ep.predators();
            assert_eq!(ev.survivors, preds.len());
            assert!(preds.windows(2).all(|w| w[0].ell() < w[1].ell()));
            assert_eq!(largest_prefix(preds, cfg.params), preds.len());
        }
    }

    #[test]
    fn founder_must_persist() {
        let cfg = figure_config();
        // delta >= alpha r / beta
        assert!(PredatorEp::new(PredatorTrait::new(1.0, 0.6).unwrap(), cfg).is_err());
    }
}
