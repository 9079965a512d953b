use alloc::vec::Vec;

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::lv::{is_viable, normal_vector, PreyTrait};
use crate::{Error, Result};

/// Mean displacement, per unit of rescaled time, of the resident along the
/// invasion normal: half the mean positive projection of a uniform point in
/// the unit disk.
pub const CANONICAL_DRIFT: f64 = 2.0 / (3.0 * PI);

fn drift(y: [f64; 2], delta: f64) -> Result<[f64; 2]> {
    let n = normal_vector(PreyTrait::new(y[0], y[1]), delta)?;
    Ok([CANONICAL_DRIFT * n[0], CANONICAL_DRIFT * n[1]])
}

/// Fixed-step RK4 solution of `dy/dt = CANONICAL_DRIFT * N(y)`, sampled at
/// every step. Leaving the viable region is a [`Error::NotViable`].
pub fn canonical_ode(y0: PreyTrait, delta: f64, t_end: f64, dt: f64) -> Result<Vec<(f64, PreyTrait)>> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Domain("need a positive step and nonnegative horizon"));
    }
    if !is_viable(y0, delta) {
        return Err(Error::NotViable);
    }
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut y = [y0.alpha, y0.beta];
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, y0));
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    for i in 1..=steps {
        let k1 = drift(y, delta)?;
        let k2 = drift(add(y, k1, h / 2.0), delta)?;
        let k3 = drift(add(y, k2, h / 2.0), delta)?;
        let k4 = drift(add(y, k3, h), delta)?;
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let next = PreyTrait::new(y[0], y[1]);
        if !(next.alpha > 0.0) || !is_viable(next, delta) {
            return Err(Error::NotViable);
        }
        out.push((i as f64 * h, next));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_is_constant_and_birth_rate_rises() {
        let path = canonical_ode(PreyTrait::new(2.0, 4.0), 1.0, 5.0, 0.01).unwrap();
        for w in path.windows(2) {
            let (t0, a) = w[0];
            let (t1, b) = w[1];
            let speed = (b.alpha - a.alpha).hypot(b.beta - a.beta) / (t1 - t0);
            assert!((speed - CANONICAL_DRIFT).abs() < 1e-4, "{speed}");
            assert!(b.beta > a.beta);
        }
        assert!((CANONICAL_DRIFT - 0.2122).abs() < 1e-4);
    }
}
