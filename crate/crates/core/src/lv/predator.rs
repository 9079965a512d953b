//! Many predators sharing one prey.
//!
//! Ordered by increasing characteristic ratio `ell_j = delta_j / alpha_j`,
//! the first `k` predators coexist with positive densities iff
//!
//! ```text
//! sum_{j <= k} alpha_j^2 (ell_k - ell_j) < r - beta ell_k
//! ```
//!
//! and the globally attracting state keeps the largest such prefix.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{EquilibriumVector, PredatorTrait, SystemParams};
use crate::{Error, Result};

fn ratio_order(a: &PredatorTrait, b: &PredatorTrait) -> Ordering {
    a.ell()
        .total_cmp(&b.ell())
        .then_with(|| b.alpha().total_cmp(&a.alpha()))
}

/// Sorts by increasing `ell`; equal ratios put the larger `alpha` first.
pub fn sort_by_ratio(predators: &mut [PredatorTrait]) {
    predators.sort_by(ratio_order);
}

/// Position at which `p` enters a list already in ratio order.
pub(crate) fn ratio_insertion_point(sorted: &[PredatorTrait], p: &PredatorTrait) -> usize {
    sorted.partition_point(|q| ratio_order(q, p) == Ordering::Less)
}

/// Face equilibrium `(sigma_0, sigma_1, ..., sigma_k)` of an ordered list in
/// which every predator is present. An empty list gives the prey-only
/// density `r / beta`.
///
/// Fails with [`Error::NotCoexisting`] if some predator coordinate is not
/// strictly positive.
pub fn predator_equilibrium(
    predators: &[PredatorTrait],
    params: SystemParams,
) -> Result<EquilibriumVector> {
    let eq = face_equilibrium(predators, params);
    if eq.predators.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotCoexisting);
    }
    Ok(eq)
}

fn face_equilibrium(predators: &[PredatorTrait], params: SystemParams) -> EquilibriumVector {
    let num = params.r()
        + predators
            .iter()
            .map(|p| p.alpha() * p.delta())
            .sum::<f64>();
    let den = params.beta() + predators.iter().map(|p| p.alpha() * p.alpha()).sum::<f64>();
    let u = num / den;
    EquilibriumVector {
        prey: vec![u],
        predators: predators
            .iter()
            .map(|p| p.alpha() * u - p.delta())
            .collect(),
    }
}

/// Whether the prefix condition holds for every `k` of an ordered list,
/// returned as a vector of flags (`flags[k - 1]` for prefix length `k`).
pub fn prefix_condition(sorted: &[PredatorTrait], params: SystemParams) -> Vec<bool> {
    let (r, beta) = (params.r(), params.beta());
    let mut s2 = 0.0;
    let mut s2l = 0.0;
    sorted
        .iter()
        .map(|p| {
            let a2 = p.alpha() * p.alpha();
            s2 += a2;
            s2l += a2 * p.ell();
            p.ell() * s2 - s2l < r - beta * p.ell()
        })
        .collect()
}

/// Largest `k` for which the first `k` predators (in ratio order) satisfy
/// the coexistence condition, `0` if none does.
pub fn coexisting_prefix(predators: &[PredatorTrait], params: SystemParams) -> usize {
    let mut sorted = predators.to_vec();
    sort_by_ratio(&mut sorted);
    largest_prefix(&sorted, params)
}

pub(crate) fn largest_prefix(sorted: &[PredatorTrait], params: SystemParams) -> usize {
    prefix_condition(sorted, params)
        .iter()
        .rposition(|&ok| ok)
        .map_or(0, |k| k + 1)
}

/// The coexisting predators in ratio order.
pub fn coexisting_set(predators: &[PredatorTrait], params: SystemParams) -> Vec<PredatorTrait> {
    let mut sorted = predators.to_vec();
    sort_by_ratio(&mut sorted);
    let m = largest_prefix(&sorted, params);
    sorted.truncate(m);
    sorted
}

/// Globally attracting equilibrium for `predators` (in ratio order), with
/// zeros for the predators beyond the coexisting prefix.
pub fn attracting_equilibrium(sorted: &[PredatorTrait], params: SystemParams) -> EquilibriumVector {
    let m = largest_prefix(sorted, params);
    let mut eq = face_equilibrium(&sorted[..m], params);
    eq.predators.resize(sorted.len(), 0.0);
    eq
}

/// Coexistence of consumption rates `alphas` (strictly decreasing) when
/// every death rate equals one:
/// `sum_j (alpha_j / alpha_N)(alpha_j - alpha_N) < r - beta / alpha_N`.
pub fn check_fixed_delta(alphas: &[f64], params: SystemParams) -> bool {
    let Some(&last) = alphas.last() else {
        return true;
    };
    let lhs: f64 = alphas.iter().map(|&a| (a / last) * (a - last)).sum();
    lhs < params.r() - params.beta() / last
}

/// Coexistence of log-traits `xs = -log delta` (strictly decreasing) when
/// every consumption rate equals one:
/// `exp(-x_N) (beta + sum_j (1 - exp(-(x_j - x_N)))) < r`.
pub fn check_fixed_alpha(xs: &[f64], params: SystemParams) -> bool {
    let Some(&last) = xs.last() else {
        return true;
    };
    let inner: f64 = xs.iter().map(|&x| 1.0 - (-(x - last)).exp()).sum();
    (-last).exp() * (params.beta() + inner) < params.r()
}

/// Lyapunov function for the attracting equilibrium `eq` of the one-prey
/// system, evaluated at `state = (u, v_1, ..., v_N)`:
///
/// ```text
/// V = u - s_0 log u + sum_{s_i > 0} (v_i - s_i log v_i) + sum_{s_i = 0} v_i
/// ```
pub fn lyapunov_value(state: &[f64], eq: &EquilibriumVector) -> Result<f64> {
    if state.len() != 1 + eq.predators.len() || eq.prey.len() != 1 {
        return Err(Error::Domain("state and equilibrium shapes differ"));
    }
    let mut v = 0.0;
    let coords = core::iter::once((&state[0], &eq.prey[0]))
        .chain(state[1..].iter().zip(&eq.predators));
    for (&x, &s) in coords {
        if s > 0.0 {
            if x <= 0.0 {
                return Err(Error::Domain("log of a non-positive density"));
            }
            v += x - s * x.ln();
        } else {
            v += x;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_death(alphas: &[f64]) -> Vec<PredatorTrait> {
        alphas
            .iter()
            .map(|&a| PredatorTrait::new(a, 1.0).unwrap())
            .collect()
    }

    fn params() -> SystemParams {
        SystemParams::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn empty_list_is_prey_only() {
        let eq = predator_equilibrium(&[], params()).unwrap();
        assert_eq!(eq.prey, vec![0.5]);
        assert!(eq.predators.is_empty());
    }

    #[test]
    fn single_predator_closed_form() {
        let p = PredatorTrait::new(1.0, 0.3).unwrap();
        let eq = predator_equilibrium(&[p], params()).unwrap();
        assert!((eq.prey[0] - 13.0 / 30.0).abs() < 1e-15);
        assert!((eq.predators[0] - (13.0 / 30.0 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(coexisting_prefix(&unit_death(&[3.0]), params()), 1);
        assert_eq!(coexisting_prefix(&unit_death(&[3.0, 2.8]), params()), 2);
        assert_eq!(coexisting_prefix(&unit_death(&[3.0, 2.0]), params()), 1);
        // order is irrelevant
        assert_eq!(coexisting_prefix(&unit_death(&[2.8, 3.0]), params()), 2);
        assert_eq!(coexisting_prefix(&unit_death(&[1.5]), params()), 0);
    }

    #[test]
    fn fixed_delta_examples() {
        assert!(check_fixed_delta(&[3.0], params()));
        assert!(check_fixed_delta(&[3.0, 2.8], params()));
        assert!(!check_fixed_delta(&[3.0, 2.0], params()));
    }

    #[test]
    fn fixed_alpha_examples() {
        let (beta, m) = (2.0, 1.0);
        let x = -(1.0f64 / (beta + m)).ln() + 0.1;
        assert!(check_fixed_alpha(&[x], params()));
        assert!(!check_fixed_alpha(&[0.0], params()));
    }

    #[test]
    fn ratio_ties_prefer_larger_alpha() {
        let mut ps = vec![
            PredatorTrait::new(1.0, 0.5).unwrap(),
            PredatorTrait::new(2.0, 1.0).unwrap(),
        ];
        sort_by_ratio(&mut ps);
        assert_eq!(ps[0].alpha(), 2.0);
    }

    #[test]
    fn lyapunov_at_equilibrium() {
        let ps = unit_death(&[3.0, 2.8]);
        let eq = attracting_equilibrium(&ps, params());
        let v = lyapunov_value(&eq.to_state(), &eq).unwrap();
        let want: f64 = eq.to_state().iter().map(|s| s * (1.0 - s.ln())).sum();
        assert!((v - want).abs() < 1e-14);
        assert!(lyapunov_value(&[0.0, 0.1, 0.1], &eq).is_err());
    }

    #[test]
    fn lyapunov_minimised_at_equilibrium() {
        let ps = unit_death(&[3.0, 2.8, 2.0]);
        let eq = attracting_equilibrium(&ps, params());
        let base = eq.to_state();
        let v0 = lyapunov_value(&base, &eq).unwrap();
        let offsets = [-0.02, -0.01, 0.01, 0.02];
        for &du in &offsets {
            for &dv in &offsets {
                let mut s = base.clone();
                s[0] += du;
                s[1] += dv;
                s[3] = 0.01;
                assert!(lyapunov_value(&s, &eq).unwrap() > v0);
            }
        }
    }
}
