//! Lotka-Volterra algebra.
//!
//! With `M` prey and `N` predators the densities obey
//!
//! ```text
//! du_i/dt = u_i (beta_i (1 - sum_k u_k) - 1 - sum_j alpha_ij v_j)
//! dv_j/dt = v_j (sum_i alpha_ij u_i - delta_j - v_j)
//! ```
//!
//! Two shapes are used: many prey against one predator with fixed death
//! rate ([`prey`]), and many predators on one prey ([`predator`]). The
//! characteristic ratio of a predator is `ell = delta / alpha`; some
//! expositions write it upside down, but every coexistence formula uses
//! `delta / alpha`.

pub mod ode;
pub mod predator;
pub mod prey;

use alloc::vec::Vec;

use crate::{Error, Result};

pub use ode::{integrate_lv, settle, LvSystem, StepControl, Trajectory};
pub use predator::{
    attracting_equilibrium, check_fixed_alpha, check_fixed_delta, coexisting_prefix,
    coexisting_set, lyapunov_value, predator_equilibrium, prefix_condition, sort_by_ratio,
};
pub use prey::{
    classify_prey_outcome, invadability_curves, invasion_fitness, is_viable, normal_vector,
    one_prey_equilibrium, prey_only_equilibrium, saturated_equilibrium, two_prey_equilibrium,
    OutcomeSupport,
};

/// Prey trait `(alpha, beta)`: exposure to the predator and birth rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreyTrait {
    pub alpha: f64,
    pub beta: f64,
}

impl PreyTrait {
    /// Placeholder for an empty prey slot. Rejected by every algebraic
    /// routine.
    pub const ABSENT: PreyTrait = PreyTrait {
        alpha: 0.0,
        beta: 0.0,
    };

    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn is_absent(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.alpha > 0.0 && self.beta > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidTrait(self.alpha, self.beta))
        }
    }
}

/// Predator trait `(alpha, delta)` with its characteristic ratio cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorTrait {
    alpha: f64,
    delta: f64,
    ell: f64,
}

impl PredatorTrait {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && delta > 0.0) || !alpha.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidTrait(alpha, delta));
        }
        Ok(Self {
            alpha,
            delta,
            ell: delta / alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `delta / alpha`.
    pub fn ell(&self) -> f64 {
        self.ell
    }
}

/// Prey birth rate for the single-prey predator systems. `r = beta - 1`
/// is the prey's intrinsic growth rate; `delta` is the predator death rate
/// used when the predator is the fixed side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    beta: f64,
    delta: f64,
}

impl SystemParams {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::NotViable);
        }
        if !(delta > 0.0) {
            return Err(Error::Domain("predator death rate must be positive"));
        }
        Ok(Self { beta, delta })
    }

    /// Parameters given the prey growth rate `r` instead of `beta`.
    pub fn from_growth_rate(r: f64, delta: f64) -> Result<Self> {
        Self::new(r + 1.0, delta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r(&self) -> f64 {
        self.beta - 1.0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Equilibrium densities, prey first, then predators.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumVector {
    pub prey: Vec<f64>,
    pub predators: Vec<f64>,
}

impl EquilibriumVector {
    /// Indices of prey with strictly positive density.
    pub fn prey_support(&self) -> Vec<usize> {
        support(&self.prey)
    }

    /// Indices of predators with strictly positive density.
    pub fn predator_support(&self) -> Vec<usize> {
        support(&self.predators)
    }

    /// Prey densities followed by predator densities.
    pub fn to_state(&self) -> Vec<f64> {
        let mut s = self.prey.clone();
        s.extend_from_slice(&self.predators);
        s
    }
}

fn support(xs: &[f64]) -> Vec<usize> {
    xs.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
        .collect()
}
