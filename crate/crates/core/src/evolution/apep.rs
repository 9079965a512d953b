use alloc::vec::Vec;

use super::EventRecord;
use crate::lv::{check_fixed_delta, SystemParams};
use crate::{Error, Result, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApepConfig {
    pub epsilon: f64,
    pub params: SystemParams,
}

/// Consumption-rate evolution with every death rate equal to one, in
/// discrete time: mutation `n` happens at time `n`.
#[derive(Debug, Clone)]
pub struct Apep {
    config: ApepConfig,
    /// Strictly decreasing.
    alphas: Vec<f64>,
    n: u64,
    max_len: usize,
}

/// Length of the longest prefix of `alphas` (strictly decreasing) whose
/// types coexist. With `e_j = alpha_1 - alpha_j` the prefix-`k` condition
/// `sum_{j<=k} alpha_j (alpha_j - alpha_k) < r alpha_k - beta` is evaluated
/// from running sums of `e_j` and `e_j^2`, which stay small.
pub fn fixed_delta_prefix(alphas: &[f64], params: SystemParams) -> usize {
    let Some(&top) = alphas.first() else {
        return 0;
    };
    let (r, beta) = (params.r(), params.beta());
    let (mut e1, mut e2) = (0.0, 0.0);
    let mut best = 0;
    for (k, &a) in alphas.iter().enumerate() {
        let e = top - a;
        e1 += e;
        e2 += e * e;
        let kf = (k + 1) as f64;
        let lhs = top * (kf * e - e1) - e * e1 + e2;
        if lhs < r * a - beta {
            best = k + 1;
        }
    }
    best
}

impl Apep {
    pub fn new(alpha0: f64, config: ApepConfig) -> Result<Self> {
        if !(config.epsilon > 0.0) {
            return Err(Error::Domain("mutation radius must be positive"));
        }
        if !check_fixed_delta(&[alpha0], config.params) {
            return Err(Error::NotCoexisting);
        }
        Ok(Self {
            config,
            alphas: alloc::vec![alpha0],
            n: 0,
            max_len: 1,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alpha_min(&self) -> f64 {
        *self.alphas.last().unwrap()
    }

    pub fn alpha_max(&self) -> f64 {
        self.alphas[0]
    }

    /// Largest number of coexisting types seen so far.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn config(&self) -> &ApepConfig {
        &self.config
    }

    /// Types at least `eps / 4` above the minimum.
    pub fn count_above_quarter_step(&self) -> usize {
        let cut = self.alpha_min() + self.config.epsilon / 4.0;
        self.alphas.partition_point(|&a| a >= cut)
    }

    /// Inserts `alpha` and truncates. Returns the insertion rank, or `None`
    /// if the value is already present or nonpositive.
    pub fn insert(&mut self, alpha: f64) -> Option<usize> {
        if !(alpha > 0.0) {
            return None;
        }
        let at = self.alphas.partition_point(|&a| a > alpha);
        if self.alphas.get(at) == Some(&alpha) {
            return None;
        }
        self.alphas.insert(at, alpha);
        let keep = fixed_delta_prefix(&self.alphas, self.config.params);
        self.alphas.truncate(keep);
        self.max_len = self.max_len.max(self.alphas.len());
        Some(at)
    }

    pub fn step(&mut self, rng: &mut RngStream) -> EventRecord {
        let parent = rng.index(self.alphas.len());
        let base = self.alphas[parent];
        let mutant = loop {
            let m = base + self.config.epsilon * rng.symmetric();
            if self.insert(m).is_some() {
                break m;
            }
        };
        self.n += 1;
        EventRecord {
            index: self.n,
            time: self.n as f64,
            parent,
            mutant: [mutant, 1.0],
            survivors: self.alphas.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::from_growth_rate(1.0, 1.0).unwrap()
    }

    #[test]
    fn prefix_scan_agrees_with_direct_check() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..500 {
            let n = 1 + rng.index(12);
            let mut a: Vec<f64> = (0..n).map(|_| 2.0 + 3.0 * rng.uniform()).collect();
            a.sort_by(|x, y| y.total_cmp(x));
            a.dedup();
            let k = fixed_delta_prefix(&a, params());
            let direct = (1..=a.len())
                .rev()
                .find(|&k| check_fixed_delta(&a[..k], params()))
                .unwrap_or(0);
            assert_eq!(k, direct, "{a:?}");
        }
    }

    #[test]
    fn spread_stays_below_r_and_condition_holds() {
        let cfg = ApepConfig {
            epsilon: 0.01,
            params: params(),
        };
        let mut apep = Apep::new(3.0, cfg).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..5000 {
            let ev = apep.step(&mut rng);
            assert_eq!(ev.survivors, apep.len());
            assert!(check_fixed_delta(apep.alphas(), cfg.params));
            assert!(apep.alpha_max() - apep.alpha_min() < 1.0);
            assert!(apep.alphas().windows(2).all(|w| w[0] > w[1]));
        }
        let m = (4.0_f64 / 0.01).ceil() as usize;
        assert!(apep.count_above_quarter_step() <= m);
    }

    #[test]
    fn founder_must_persist() {
        let cfg = ApepConfig {
            epsilon: 0.01,
            params: params(),
        };
        // r - beta / alpha <= 0
        assert!(Apep::new(2.0, cfg).is_err());
        assert!(Apep::new(2.5, cfg).is_ok());
    }
}
