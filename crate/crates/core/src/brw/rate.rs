//! `phi(theta) = sinh(theta) / theta` is the moment generating function of
//! a uniform displacement on `[-1, 1]`, and
//!
//! ```text
//! Lambda(x) = -( sup_{theta > 0} { theta x - phi(theta) } + 1 )
//! ```
//!
//! is the exponential decay rate of `P(S_t > x t)` for the rate-one
//! compound Poisson walk `S_t`.


#[allow(unused_imports)]
use num_traits::Float;
use crate::{Error, Result};

const BRACKET: (f64, f64) = (1e-8, 50.0);

/// Removable singularity at zero filled in by the Taylor series.
pub fn phi(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        1.0 + t2 / 6.0 + t2 * t2 / 120.0
    } else {
        theta.sinh() / theta
    }
}

// Series coefficients of phi' and phi'' in powers of theta (odd and even
// respectively), used where the closed forms cancel badly.
const PHI1_SERIES: [f64; 5] = [
    1.0 / 3.0,
    1.0 / 30.0,
    1.0 / 840.0,
    1.0 / 45360.0,
    1.0 / 3991680.0,
];
const PHI2_SERIES: [f64; 5] = [
    1.0 / 3.0,
    1.0 / 10.0,
    1.0 / 168.0,
    1.0 / 6480.0,
    1.0 / 443520.0,
];

fn even_series(coeffs: &[f64], t2: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t2 + c)
}

fn phi_prime(theta: f64) -> f64 {
    if theta.abs() < 0.1 {
        theta * even_series(&PHI1_SERIES, theta * theta)
    } else {
        (theta * theta.cosh() - theta.sinh()) / (theta * theta)
    }
}

fn phi_second(theta: f64) -> f64 {
    if theta.abs() < 0.1 {
        even_series(&PHI2_SERIES, theta * theta)
    } else {
        ((theta * theta + 2.0) * theta.sinh() - 2.0 * theta * theta.cosh()) / (theta * theta * theta)
    }
}

/// Maximiser of the concave map `theta -> theta x - phi(theta)` for
/// `0 < x < 1`: golden-section search on the bracket, then Newton on the
/// stationarity condition `phi'(theta) = x`.
pub fn optimal_tilt(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let psi = |t: f64| t * x - phi(t);
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = BRACKET;
    let mut c = hi - inv_golden * (hi - lo);
    let mut d = lo + inv_golden * (hi - lo);
    let (mut fc, mut fd) = (psi(c), psi(d));
    while hi - lo > 1e-9 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_golden * (hi - lo);
            fc = psi(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_golden * (hi - lo);
            fd = psi(d);
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..50 {
        let grad = x - phi_prime(theta);
        if grad.abs() < 1e-12 {
            break;
        }
        let next = theta + grad / phi_second(theta);
        theta = next.clamp(BRACKET.0, BRACKET.1);
    }
    Ok(theta)
}

/// The rate function on `[0, 1)`. Displacements are bounded by one, so
/// speeds at or above one are rejected.
pub fn lambda(x: f64) -> Result<f64> {
    let theta = optimal_tilt(x)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    Ok(-(theta * x - phi(theta) + 1.0))
}

fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) > 0 > f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const UPPER: f64 = 1.0 - 1e-9;

/// Speed `a` of the rightmost particle: the root of `Lambda(a) = -1`.
pub fn solve_speed_a() -> f64 {
    bisect(|x| lambda(x).unwrap() + 1.0, 0.0, UPPER)
}

/// Speed `b` of the leftmost surviving predator: the root in `(0, 1)` of
/// `Lambda(b) = -1 + b`.
pub fn solve_speed_b() -> f64 {
    bisect(|x| lambda(x).unwrap() + 1.0 - x, 0.0, UPPER)
}
