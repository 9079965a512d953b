//! Prey evolving against a single predator with fixed death rate `delta`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use super::{EquilibriumVector, PreyTrait};
use crate::{linalg, Error, Result};

/// Prey density without predators, `(beta - 1) / beta`.
pub fn prey_only_equilibrium(y: PreyTrait) -> Result<f64> {
    y.check()?;
    if y.beta <= 1.0 {
        return Err(Error::NotViable);
    }
    Ok((y.beta - 1.0) / y.beta)
}

/// The predator can invade the prey-only equilibrium:
/// `alpha > delta` and `beta > alpha / (alpha - delta) > 1`.
pub fn is_viable(y: PreyTrait, delta: f64) -> bool {
    y.check().is_ok() && y.alpha > delta && y.beta > y.alpha / (y.alpha - delta)
}

/// Closed-form prey/predator densities of the one-prey equilibrium without
/// any viability check. Outside the viable region the predator coordinate
/// is non-positive.
pub fn one_prey_densities(y: PreyTrait, delta: f64) -> (f64, f64) {
    let den = y.beta + y.alpha * y.alpha;
    let u = ((y.beta - 1.0) + y.alpha * delta) / den;
    let v = ((y.beta - 1.0) * y.alpha - y.beta * delta) / den;
    (u, v)
}

/// The interior prey-predator equilibrium of a viable prey.
pub fn one_prey_equilibrium(y: PreyTrait, delta: f64) -> Result<EquilibriumVector> {
    y.check()?;
    if !is_viable(y, delta) {
        return Err(Error::NotViable);
    }
    let (u, v) = one_prey_densities(y, delta);
    Ok(EquilibriumVector {
        prey: vec![u],
        predators: vec![v],
    })
}

/// Growth rate of a rare `invader` when `resident` and the predator sit at
/// their equilibrium: `beta_2 (1 - u*) - 1 - alpha_2 v*`. The invader
/// takes over from rare iff the value is positive.
pub fn invasion_fitness(resident: PreyTrait, invader: PreyTrait, delta: f64) -> Result<f64> {
    resident.check()?;
    invader.check()?;
    // beta_2 (1 - u*) - 1 - alpha_2 v*, expanded over the common denominator
    // so that identical traits cancel term by term.
    let (a1, b1) = (resident.alpha, resident.beta);
    let (a2, b2) = (invader.alpha, invader.beta);
    let num = (b2 - b1) + a1 * (a1 * (b2 - 1.0) - a2 * (b1 - 1.0)) + delta * (a2 * b1 - a1 * b2);
    Ok(num / (b1 + a1 * a1))
}

/// Birth rates `(g, h)` on the two invadability curves through `y1` at
/// abscissa `alpha`. Above `h` a mutant invades `y1`; below `g` the
/// resident `y1` invades the mutant back.
pub fn invadability_curves(y1: PreyTrait, alpha: f64, delta: f64) -> Result<(f64, f64)> {
    y1.check()?;
    if !is_viable(y1, delta) {
        return Err(Error::NotViable);
    }
    let den = 1.0 + y1.alpha * (alpha - delta);
    if den == 0.0 {
        return Err(Error::Singular("1 + alpha_1 (alpha - delta) vanishes"));
    }
    let g = ((y1.beta - 1.0) * alpha * alpha + (y1.alpha - y1.beta * delta) * alpha + y1.beta)
        / den;
    let (u, v) = one_prey_densities(y1, delta);
    let h = (alpha * v + 1.0) / (1.0 - u);
    Ok((g, h))
}

/// Unit normal to the invadability curves at `y1`, pointing into the
/// region of successful invaders: proportional to `(-v*, 1 - u*)`.
pub fn normal_vector(y1: PreyTrait, delta: f64) -> Result<[f64; 2]> {
    y1.check()?;
    if !is_viable(y1, delta) {
        return Err(Error::NotViable);
    }
    let (u, v) = one_prey_densities(y1, delta);
    let (x, y) = (-v, 1.0 - u);
    let norm = x.hypot(y);
    Ok([x / norm, y / norm])
}

/// Which prey survive (indices into `residents ++ [invader]`) and whether
/// the predator persists, with the attracting equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSupport {
    pub prey: Vec<usize>,
    pub predator: bool,
    pub equilibrium: EquilibriumVector,
}

/// Outcome of introducing `invader` into a community of one or two resident
/// prey and the predator.
///
/// With one viable resident and a viable invader the answer comes from the
/// signs of the invasion fitness in both directions: mutual invasion gives
/// coexistence, one-sided invasion gives replacement or retention. All other
/// configurations (two residents, non-viable traits) are resolved by
/// enumerating candidate supports and keeping the unique saturated one.
pub fn classify_prey_outcome(
    residents: &[PreyTrait],
    invader: PreyTrait,
    delta: f64,
) -> Result<OutcomeSupport> {
    if residents.is_empty() || residents.len() > 2 {
        return Err(Error::Domain("one or two resident prey expected"));
    }
    let mut all: Vec<PreyTrait> = residents.to_vec();
    all.push(invader);
    for y in &all {
        y.check()?;
    }
    check_distinct_births(&all)?;

    if residents.len() == 1 && is_viable(residents[0], delta) && is_viable(invader, delta) {
        let resident = residents[0];
        let forward = invasion_fitness(resident, invader, delta)? > 0.0;
        let backward = invasion_fitness(invader, resident, delta)? > 0.0;
        match (forward, backward) {
            (true, true) => {
                let eq = two_prey_equilibrium(resident, invader, delta)?;
                return Ok(OutcomeSupport {
                    prey: vec![0, 1],
                    predator: true,
                    equilibrium: eq,
                });
            }
            (true, false) => return Ok(single(1, 2, invader, delta)),
            (false, true) => return Ok(single(0, 2, resident, delta)),
            // Only on the curves themselves; let the enumeration decide.
            (false, false) => {}
        }
    }

    let eq = saturated_equilibrium(&all, delta)?;
    let prey = eq.prey_support();
    let predator = eq.predators[0] > 0.0;
    Ok(OutcomeSupport {
        prey,
        predator,
        equilibrium: eq,
    })
}

fn single(index: usize, count: usize, y: PreyTrait, delta: f64) -> OutcomeSupport {
    let (u, v) = one_prey_densities(y, delta);
    let mut prey = vec![0.0; count];
    prey[index] = u;
    OutcomeSupport {
        prey: vec![index],
        predator: true,
        equilibrium: EquilibriumVector {
            prey,
            predators: vec![v],
        },
    }
}

fn check_distinct_births(prey: &[PreyTrait]) -> Result<()> {
    for (i, a) in prey.iter().enumerate() {
        if prey[i + 1..].iter().any(|b| b.beta == a.beta) {
            return Err(Error::DegenerateTie);
        }
    }
    Ok(())
}

/// Coexistence equilibrium of two mutually invading prey with the predator,
/// from the 3x3 linear system `r + A sigma = 0`.
pub fn two_prey_equilibrium(y1: PreyTrait, y2: PreyTrait, delta: f64) -> Result<EquilibriumVector> {
    y1.check()?;
    y2.check()?;
    if y1.beta == y2.beta {
        return Err(Error::DegenerateTie);
    }
    if invasion_fitness(y1, y2, delta)? <= 0.0 || invasion_fitness(y2, y1, delta)? <= 0.0 {
        return Err(Error::NotCoexisting);
    }
    let sys = PreyCommunity::new(&[y1, y2], delta);
    let x = sys.interior(&[0, 1, 2]).ok_or(Error::NotCoexisting)?;
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotCoexisting);
    }
    Ok(EquilibriumVector {
        prey: vec![x[0], x[1]],
        predators: vec![x[2]],
    })
}

/// The unique saturated equilibrium of `prey` with one predator: positive
/// on its support and not invadable by any absent type.
///
/// Every subset of species is tried; singular subsystems are skipped.
/// More than one saturated point only happens on invadability curves and is
/// reported as [`Error::DegenerateTie`].
pub fn saturated_equilibrium(prey: &[PreyTrait], delta: f64) -> Result<EquilibriumVector> {
    for y in prey {
        y.check()?;
    }
    check_distinct_births(prey)?;
    let sys = PreyCommunity::new(prey, delta);
    let n = prey.len() + 1;
    let mut found: Option<Vec<f64>> = None;
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let x = if members.is_empty() {
            Vec::new()
        } else {
            match sys.interior(&members) {
                Some(x) if x.iter().all(|&v| v > 0.0) => x,
                _ => continue,
            }
        };
        let mut full = vec![0.0; n];
        for (&i, &v) in members.iter().zip(&x) {
            full[i] = v;
        }
        let saturated = (0..n)
            .filter(|i| mask & (1 << i) == 0)
            .all(|i| sys.growth(i, &full) <= 0.0);
        if saturated {
            if found.is_some() {
                return Err(Error::DegenerateTie);
            }
            found = Some(full);
        }
    }
    let full = found.ok_or(Error::Invariant("no saturated equilibrium"))?;
    Ok(EquilibriumVector {
        prey: full[..n - 1].to_vec(),
        predators: vec![full[n - 1]],
    })
}

/// Lotka-Volterra form `dx_i/dt = x_i (r_i + (A x)_i)` of many prey and one
/// predator; the predator is the last species.
struct PreyCommunity {
    r: Vec<f64>,
    a: Vec<f64>,
    n: usize,
}

impl PreyCommunity {
    fn new(prey: &[PreyTrait], delta: f64) -> Self {
        let m = prey.len();
        let n = m + 1;
        let mut a = vec![0.0; n * n];
        let mut r = vec![0.0; n];
        for (i, y) in prey.iter().enumerate() {
            r[i] = y.beta - 1.0;
            for k in 0..m {
                a[i * n + k] = -y.beta;
            }
            a[i * n + m] = -y.alpha;
            a[m * n + i] = y.alpha;
        }
        r[m] = -delta;
        a[m * n + m] = -1.0;
        Self { r, a, n }
    }

    fn growth(&self, i: usize, x: &[f64]) -> f64 {
        self.r[i] + (0..self.n).map(|k| self.a[i * self.n + k] * x[k]).sum::<f64>()
    }

    fn interior(&self, members: &[usize]) -> Option<Vec<f64>> {
        let k = members.len();
        let mut a = Vec::with_capacity(k * k);
        for &i in members {
            for &j in members {
                a.push(self.a[i * self.n + j]);
            }
        }
        let b = members.iter().map(|&i| -self.r[i]).collect();
        linalg::solve(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA: f64 = 1.0;
    const Y1: PreyTrait = PreyTrait::new(2.0, 4.0);

    #[test]
    fn prey_only_values() {
        assert_eq!(prey_only_equilibrium(PreyTrait::new(1.0, 2.0)).unwrap(), 0.5);
        assert_eq!(prey_only_equilibrium(PreyTrait::new(1.0, 4.0)).unwrap(), 0.75);
        assert_eq!(
            prey_only_equilibrium(PreyTrait::new(1.0, 1.0)),
            Err(Error::NotViable)
        );
        assert!(prey_only_equilibrium(PreyTrait::ABSENT).is_err());
    }

    #[test]
    fn viability() {
        assert!(is_viable(Y1, DELTA));
        assert!(!is_viable(PreyTrait::new(1.0, 10.0), 1.0));
        assert!(!is_viable(PreyTrait::new(2.0, 1.9), 1.0));
        assert!(!is_viable(PreyTrait::ABSENT, 1.0));
    }

    #[test]
    fn one_prey_closed_form() {
        let eq = one_prey_equilibrium(Y1, DELTA).unwrap();
        assert_eq!(eq.prey, vec![0.625]);
        assert_eq!(eq.predators, vec![0.25]);
        // on the viability boundary the predator density vanishes
        let alpha: f64 = 3.0;
        let y = PreyTrait::new(alpha, alpha / (alpha - DELTA));
        let (_, v) = one_prey_densities(y, DELTA);
        assert!(v.abs() < 1e-15);
        assert_eq!(one_prey_equilibrium(y, DELTA), Err(Error::NotViable));
    }

    #[test]
    fn resident_is_neutral_against_itself() {
        for y in [Y1, PreyTrait::new(3.0, 3.0), PreyTrait::new(1.5, 7.0)] {
            assert_eq!(invasion_fitness(y, y, DELTA).unwrap(), 0.0);
        }
    }

    #[test]
    fn fitness_signs_for_birth_rate_shifts() {
        let up = PreyTrait::new(2.0, 4.1);
        let down = PreyTrait::new(2.0, 3.9);
        assert!(invasion_fitness(Y1, up, DELTA).unwrap() > 0.0);
        assert!(invasion_fitness(Y1, down, DELTA).unwrap() < 0.0);
    }

    #[test]
    fn curves_touch_at_resident() {
        let (g, h) = invadability_curves(Y1, 2.0, DELTA).unwrap();
        assert!((g - 4.0).abs() < 1e-14 && (h - 4.0).abs() < 1e-14);
        for i in 0..=100 {
            let a = 1.5 + i as f64 * 0.01;
            let (g, h) = invadability_curves(Y1, a, DELTA).unwrap();
            assert!(g - h >= -1e-12, "alpha {a}: g {g} h {h}");
        }
        let step = 1e-5;
        let f = |a: f64| {
            let (g, h) = invadability_curves(Y1, a, DELTA).unwrap();
            g - h
        };
        let slope = (f(2.0 + step) - f(2.0 - step)) / (2.0 * step);
        assert!(slope.abs() < 1e-6, "{slope}");
    }

    #[test]
    fn curves_reject_singular_denominator() {
        // 1 + 2 (alpha - 1) = 0 at alpha = 1/2
        assert!(matches!(
            invadability_curves(Y1, 0.5, DELTA),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn normal_vector_examples() {
        let n = normal_vector(Y1, DELTA).unwrap();
        let s = 13f64.sqrt();
        assert!((n[0] + 2.0 / s).abs() < 1e-15 && (n[1] - 3.0 / s).abs() < 1e-15);
        // Approaching the viability boundary the normal straightens up.
        let alpha: f64 = 3.0;
        let y = PreyTrait::new(alpha, alpha / (alpha - DELTA) + 1e-9);
        let n = normal_vector(y, DELTA).unwrap();
        assert!(n[0].abs() < 1e-8 && (n[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_one_resident_cases() {
        let out = classify_prey_outcome(&[Y1], PreyTrait::new(2.0, 4.5), DELTA).unwrap();
        assert_eq!(out.prey, vec![1]);
        let out = classify_prey_outcome(&[Y1], PreyTrait::new(2.0, 3.0), DELTA).unwrap();
        assert_eq!(out.prey, vec![0]);
        // between the curves near the tangency
        let a = 2.05;
        let (g, h) = invadability_curves(Y1, a, DELTA).unwrap();
        let out = classify_prey_outcome(&[Y1], PreyTrait::new(a, 0.5 * (g + h)), DELTA).unwrap();
        assert_eq!(out.prey, vec![0, 1]);
        assert!(out.equilibrium.prey.iter().sum::<f64>() < 1.0);
    }

    #[test]
    fn classify_rejects_ties() {
        assert_eq!(
            classify_prey_outcome(&[Y1], PreyTrait::new(2.5, 4.0), DELTA),
            Err(Error::DegenerateTie)
        );
    }

    #[test]
    fn enumeration_agrees_with_sign_tests() {
        for (a, b) in [(2.0, 4.5), (2.0, 3.0), (2.3, 4.3), (1.7, 3.9), (2.5, 5.0)] {
            let inv = PreyTrait::new(a, b);
            let fast = classify_prey_outcome(&[Y1], inv, DELTA).unwrap();
            let slow = saturated_equilibrium(&[Y1, inv], DELTA).unwrap();
            assert_eq!(fast.prey, slow.prey_support(), "({a}, {b})");
            for (x, y) in fast.equilibrium.prey.iter().zip(&slow.prey) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_prey_requires_mutual_invasion() {
        assert_eq!(
            two_prey_equilibrium(Y1, PreyTrait::new(2.0, 4.5), DELTA),
            Err(Error::NotCoexisting)
        );
    }

    #[test]
    fn three_prey_never_coexist() {
        let a = 2.05;
        let (g, h) = invadability_curves(Y1, a, DELTA).unwrap();
        let y2 = PreyTrait::new(a, 0.5 * (g + h));
        for (x, b) in [(2.02, 4.03), (1.98, 3.99), (2.1, 4.2), (2.0, 4.6), (2.03, 3.5)] {
            let out = classify_prey_outcome(&[Y1, y2], PreyTrait::new(x, b), DELTA).unwrap();
            assert!(out.prey.len() <= 2);
            assert!(!out.prey.is_empty());
        }
    }
}
