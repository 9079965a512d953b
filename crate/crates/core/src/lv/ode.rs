//! Adaptive Dormand-Prince 5(4) integration of the Lotka-Volterra system.
//!
//! Only used to verify the closed forms. Positive densities are integrated
//! as logarithms, so they stay positive however small they get and the
//! error control is relative; zero densities stay zero.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use super::{PredatorTrait, PreyTrait, SystemParams};
use crate::{Error, Result};

/// `M` prey and `N` predators with consumption matrix `alpha[i * N + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LvSystem {
    pub prey_birth: Vec<f64>,
    pub predator_death: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl LvSystem {
    /// Prey with their own exposure rates against one predator.
    pub fn one_predator(prey: &[PreyTrait], delta: f64) -> Self {
        Self {
            prey_birth: prey.iter().map(|y| y.beta).collect(),
            predator_death: vec![delta],
            alpha: prey.iter().map(|y| y.alpha).collect(),
        }
    }

    /// Predators with their own consumption rates on one prey.
    pub fn one_prey(predators: &[PredatorTrait], params: SystemParams) -> Self {
        Self {
            prey_birth: vec![params.beta()],
            predator_death: predators.iter().map(|p| p.delta()).collect(),
            alpha: predators.iter().map(|p| p.alpha()).collect(),
        }
    }

    pub fn prey_count(&self) -> usize {
        self.prey_birth.len()
    }

    pub fn predator_count(&self) -> usize {
        self.predator_death.len()
    }

    pub fn dim(&self) -> usize {
        self.prey_count() + self.predator_count()
    }

    /// Per-capita growth rates at `x = (u_1..u_M, v_1..v_N)`.
    pub fn per_capita(&self, x: &[f64], out: &mut [f64]) {
        let (m, n) = (self.prey_count(), self.predator_count());
        let (u, v) = x.split_at(m);
        let total: f64 = u.iter().sum();
        for i in 0..m {
            let eaten: f64 = (0..n).map(|j| self.alpha[i * n + j] * v[j]).sum();
            out[i] = self.prey_birth[i] * (1.0 - total) - 1.0 - eaten;
        }
        for j in 0..n {
            let food: f64 = (0..m).map(|i| self.alpha[i * n + j] * u[i]).sum();
            out[m + j] = food - self.predator_death[j] - v[j];
        }
    }

    /// Vector field at `x`, written into `out`.
    pub fn rhs(&self, x: &[f64], out: &mut [f64]) {
        self.per_capita(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o *= xi;
        }
    }
}

/// Tolerances for the adaptive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: 1.0,
            min_step: 1e-13,
        }
    }
}

/// Densities sampled at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }
}

// Dormand-Prince tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    sys: &'a LvSystem,
    ctl: StepControl,
    active: Vec<bool>,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    dens: Vec<f64>,
    next: Vec<f64>,
    h: f64,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a LvSystem, ctl: StepControl, x0: &[f64]) -> Self {
        let d = sys.dim();
        Self {
            sys,
            ctl,
            active: x0.iter().map(|&v| v > 0.0).collect(),
            k: core::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            dens: vec![0.0; d],
            next: vec![0.0; d],
            h: ctl.initial_step,
        }
    }

    fn to_log(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.active)
            .map(|(&v, &on)| if on { v.ln() } else { 0.0 })
            .collect()
    }

    fn to_density(&self, y: &[f64], x: &mut [f64]) {
        for ((xi, &yi), &on) in x.iter_mut().zip(y).zip(&self.active) {
            *xi = if on { yi.exp() } else { 0.0 };
        }
    }

    fn log_rhs(&mut self, s: usize) {
        for ((d, &yi), &on) in self.dens.iter_mut().zip(&self.tmp).zip(&self.active) {
            *d = if on { yi.exp() } else { 0.0 };
        }
        self.sys.per_capita(&self.dens, &mut self.k[s]);
        for (k, &on) in self.k[s].iter_mut().zip(&self.active) {
            if !on {
                *k = 0.0;
            }
        }
    }

    /// Advances the log-state `y` from `t` by one accepted step no longer
    /// than `limit`.
    fn step(&mut self, t: f64, y: &mut [f64], limit: f64) -> Result<f64> {
        let d = y.len();
        loop {
            let h = self.h.min(limit).min(self.ctl.max_step);
            if h < self.ctl.min_step && h < limit {
                return Err(Error::Stiffness(t));
            }
            for s in 0..7 {
                for i in 0..d {
                    let mut acc = y[i];
                    for (l, a) in A[s].iter().enumerate().take(s) {
                        acc += h * a * self.k[l][i];
                    }
                    self.tmp[i] = acc;
                }
                self.log_rhs(s);
            }
            let mut err: f64 = 0.0;
            for i in 0..d {
                let mut hi = 0.0;
                let mut lo = 0.0;
                for s in 0..7 {
                    hi += B5[s] * self.k[s][i];
                    lo += B4[s] * self.k[s][i];
                }
                self.next[i] = y[i] + h * hi;
                let scale = self.ctl.atol + self.ctl.rtol * y[i].abs().max(self.next[i].abs());
                err = err.max((h * (hi - lo)).abs() / scale);
            }
            if !err.is_finite() {
                self.h = h * 0.1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                y.copy_from_slice(&self.next);
                self.h = h * factor;
                return Ok(h);
            }
            self.h = h * factor;
        }
    }
}

fn check_initial(sys: &LvSystem, x0: &[f64]) -> Result<()> {
    if x0.len() != sys.dim() {
        return Err(Error::Domain("state dimension does not match the system"));
    }
    if x0.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Domain("densities must be non-negative"));
    }
    if x0[..sys.prey_count()].iter().sum::<f64>() > 1.0 {
        return Err(Error::Domain("prey densities must sum to at most one"));
    }
    Ok(())
}

/// Integrates from `x0` at time zero, recording the state at each of the
/// increasing `sample_times`.
pub fn integrate_lv(
    sys: &LvSystem,
    x0: &[f64],
    sample_times: &[f64],
    ctl: StepControl,
) -> Result<Trajectory> {
    check_initial(sys, x0)?;
    let mut stepper = Stepper::new(sys, ctl, x0);
    let mut y = stepper.to_log(x0);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut out = Trajectory {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
    };
    for &target in sample_times {
        while t < target {
            let h = stepper.step(t, &mut y, target - t)?;
            t = if target - t - h <= 1e-12 * target.abs().max(1.0) {
                target
            } else {
                t + h
            };
        }
        stepper.to_density(&y, &mut x);
        out.times.push(target);
        out.states.push(x.clone());
    }
    Ok(out)
}

/// Integrates until the vector field's sup-norm drops below `tol` (checked
/// after each step) or `t_max` is reached. Returns the final time and state.
pub fn settle(
    sys: &LvSystem,
    x0: &[f64],
    t_max: f64,
    tol: f64,
    ctl: StepControl,
) -> Result<(f64, Vec<f64>)> {
    check_initial(sys, x0)?;
    let mut stepper = Stepper::new(sys, ctl, x0);
    let mut y = stepper.to_log(x0);
    let mut x = x0.to_vec();
    let mut f = vec![0.0; x.len()];
    let mut t = 0.0;
    while t < t_max {
        let h = stepper.step(t, &mut y, t_max - t)?;
        t += h;
        stepper.to_density(&y, &mut x);
        sys.rhs(&x, &mut f);
        if f.iter().fold(0.0f64, |m, v| m.max(v.abs())) < tol {
            break;
        }
    }
    Ok((t, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_limit() {
        let sys = LvSystem {
            prey_birth: vec![2.0],
            predator_death: vec![],
            alpha: vec![],
        };
        let tr = integrate_lv(&sys, &[0.1], &[1.0, 50.0], StepControl::default()).unwrap();
        // u' = u (1 - 2u): u(t) = 1 / (2 + 8 e^{-t})
        let exact = 1.0 / (2.0 + 8.0 * (-1.0f64).exp());
        assert!((tr.states[0][0] - exact).abs() < 1e-9);
        assert!((tr.states[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn near_critical_prey_settles() {
        let sys = LvSystem {
            prey_birth: vec![1.0001],
            predator_death: vec![],
            alpha: vec![],
        };
        let (_, x) = settle(&sys, &[0.3], 1e6, 1e-16, StepControl::default()).unwrap();
        assert!((x[0] - 0.0001 / 1.0001).abs() < 1e-9, "{}", x[0]);
    }

    #[test]
    fn rejects_states_outside_gamma() {
        let sys = LvSystem::one_predator(&[PreyTrait::new(2.0, 4.0)], 1.0);
        assert!(integrate_lv(&sys, &[1.2, 0.1], &[1.0], StepControl::default()).is_err());
        assert!(integrate_lv(&sys, &[-0.1, 0.1], &[1.0], StepControl::default()).is_err());
    }
}
