use alloc::vec::Vec;

use super::{EventRecord, MutationRate};
use crate::lv::{classify_prey_outcome, is_viable, PreyTrait};
use crate::{Error, Result, RngStream};

const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreyEpConfig {
    pub epsilon: f64,
    /// Predator death rate.
    pub delta: f64,
    pub rate: MutationRate,
}

impl PreyEpConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            rate: MutationRate::Total(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreyEpState {
    /// `None` once the process is absorbed.
    pub y1: Option<PreyTrait>,
    pub y2: Option<PreyTrait>,
    pub clock: f64,
    pub epsilon: f64,
    /// Times at which a second prey type started coexisting.
    pub coexistence_event_times: Vec<f64>,
    /// Total time spent with two live prey types.
    pub dimorphic_time: f64,
    pub events: u64,
}

impl PreyEpState {
    pub fn residents(&self) -> Vec<PreyTrait> {
        self.y1.iter().chain(self.y2.iter()).copied().collect()
    }
}

/// Prey evolutionary process: one predator type, at most two prey types.
#[derive(Debug, Clone)]
pub struct PreyEp {
    config: PreyEpConfig,
    state: PreyEpState,
}

impl PreyEp {
    pub fn new(y0: PreyTrait, config: PreyEpConfig) -> Result<Self> {
        if !(config.epsilon > 0.0) {
            return Err(Error::Domain("mutation radius must be positive"));
        }
        if !is_viable(y0, config.delta) {
            return Err(Error::NotViable);
        }
        Ok(Self {
            config,
            state: PreyEpState {
                y1: Some(y0),
                y2: None,
                clock: 0.0,
                epsilon: config.epsilon,
                coexistence_event_times: Vec::new(),
                dimorphic_time: 0.0,
                events: 0,
            },
        })
    }

    pub fn state(&self) -> &PreyEpState {
        &self.state
    }

    pub fn config(&self) -> &PreyEpConfig {
        &self.config
    }

    pub fn is_absorbed(&self) -> bool {
        self.state.y1.is_none()
    }

    fn hold(&mut self, until: f64) {
        if self.state.y2.is_some() {
            self.state.dimorphic_time += until - self.state.clock;
        }
        self.state.clock = until;
    }

    /// One mutation event, or `None` when absorbed.
    pub fn step(&mut self, rng: &mut RngStream) -> Option<EventRecord> {
        self.advance(f64::INFINITY, rng)
    }

    /// Next event if it falls at or before `horizon`; otherwise the clock is
    /// moved to `horizon` and `None` is returned.
    pub fn advance(&mut self, horizon: f64, rng: &mut RngStream) -> Option<EventRecord> {
        let residents = self.state.residents();
        if residents.is_empty() {
            return None;
        }
        let at = self.state.clock + rng.exponential(self.config.rate.total(residents.len()));
        if at > horizon {
            self.hold(horizon);
            return None;
        }
        self.hold(at);
        let parent = rng.index(residents.len());
        let mut draw = None;
        for _ in 0..MAX_RESAMPLES {
            let (da, db) = rng.disk(self.config.epsilon);
            let m = PreyTrait::new(residents[parent].alpha + da, residents[parent].beta + db);
            if !(m.alpha > 0.0 && m.beta > 0.0) {
                continue;
            }
            // ties and knife-edge cases are probability-zero; draw again
            if let Ok(out) = classify_prey_outcome(&residents, m, self.config.delta) {
                draw = Some((m, out.prey));
                break;
            }
        }
        let (mutant, support) = draw.unwrap_or_else(|| {
            let m = residents[parent];
            (m, (0..residents.len()).collect())
        });
        let mut pool = residents.clone();
        pool.push(mutant);
        let live: Vec<PreyTrait> = support.iter().map(|&i| pool[i]).collect();
        let was_dimorphic = self.state.y2.is_some();
        self.state.y1 = live.first().copied();
        self.state.y2 = live.get(1).copied();
        if self.state.y2.is_some() && !was_dimorphic {
            self.state.coexistence_event_times.push(at);
        }
        self.state.events += 1;
        Some(EventRecord {
            index: self.state.events,
            time: at,
            parent,
            mutant: [mutant.alpha, mutant.beta],
            survivors: live.len(),
        })
    }

    /// Runs to `t_end`, appending events to `log` when given.
    pub fn run_until(
        &mut self,
        t_end: f64,
        rng: &mut RngStream,
        mut log: Option<&mut Vec<EventRecord>>,
    ) {
        while self.state.clock < t_end && !self.is_absorbed() {
            if let Some(ev) = self.advance(t_end, rng) {
                if let Some(log) = log.as_deref_mut() {
                    log.push(ev);
                }
            }
        }
        if self.is_absorbed() {
            self.state.clock = t_end.max(self.state.clock);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lv::invasion_fitness;

    #[test]
    fn dimorphic_pairs_are_mutually_invadable() {
        let cfg = PreyEpConfig::new(0.05, 1.0);
        let mut ep = PreyEp::new(PreyTrait::new(2.0, 4.0), cfg).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..3000 {
            ep.step(&mut rng).unwrap();
            let s = ep.state();
            if let (Some(a), Some(b)) = (s.y1, s.y2) {
                assert!(invasion_fitness(a, b, 1.0).unwrap() > 0.0);
                assert!(invasion_fitness(b, a, 1.0).unwrap() > 0.0);
            }
            assert!(s.y1.is_some());
        }
        assert!(ep.state().dimorphic_time <= ep.state().clock);
    }

    #[test]
    fn run_until_stops_on_the_horizon() {
        let cfg = PreyEpConfig::new(0.05, 1.0);
        let mut ep = PreyEp::new(PreyTrait::new(2.0, 4.0), cfg).unwrap();
        let mut rng = RngStream::new(8, 0);
        let mut log = Vec::new();
        ep.run_until(50.0, &mut rng, Some(&mut log));
        assert_eq!(ep.state().clock, 50.0);
        assert_eq!(log.len() as u64, ep.state().events);
        assert!(log.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn non_viable_start_is_rejected() {
        let cfg = PreyEpConfig::new(0.05, 1.0);
        assert!(PreyEp::new(PreyTrait::new(0.1, 1.0), cfg).is_err());
    }
}
