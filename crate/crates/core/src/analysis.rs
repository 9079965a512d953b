//! Estimators applied to simulation output: least-squares front speeds,
//! log-log scaling exponents, stationary spacing profiles and windowed
//! dispersion indices. Everything here is a pure function of its input.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::{Error, Result};

pub const DEFAULT_BURN_IN: f64 = 0.3;
const MIN_SLOPE_POINTS: usize = 10;
const MIN_DISPERSION_EVENTS: usize = 20;

/// Time series with strictly increasing times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TrajectorySample {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Invariant("times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Invariant("times must be strictly increasing"));
        }
        Ok(Self { times, values })
    }

    /// Appends a point; non-increasing times are rejected.
    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Invariant("times must be strictly increasing"));
            }
        }
        self.times.push(t);
        self.values.push(v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Heteroskedasticity-consistent (HC1) standard error of the slope.
    pub stderr: f64,
    pub n: usize,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<SlopeEstimate> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::Singular("abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut meat = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let e = y - intercept - slope * x;
        meat += (x - mx) * (x - mx) * e * e;
    }
    let stderr = (meat * nf / (nf - 2.0)).sqrt() / sxx;
    Ok(SlopeEstimate {
        slope,
        intercept,
        stderr,
        n,
    })
}

/// Least-squares slope after discarding the first `burn_in` fraction of
/// the sample's time span.
pub fn slope_estimate(sample: &TrajectorySample, burn_in: f64) -> Result<SlopeEstimate> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::Domain("burn-in fraction must lie in [0, 1)"));
    }
    let (Some(&t0), Some(&t1)) = (sample.times.first(), sample.times.last()) else {
        return Err(Error::InsufficientData {
            needed: MIN_SLOPE_POINTS,
            got: 0,
        });
    };
    let cut = t0 + burn_in * (t1 - t0);
    let start = sample.times.partition_point(|&t| t < cut);
    let got = sample.len() - start;
    if got < MIN_SLOPE_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_SLOPE_POINTS,
            got,
        });
    }
    least_squares(&sample.times[start..], &sample.values[start..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// 95% confidence interval for the exponent.
    pub interval: (f64, f64),
    pub n: usize,
}

// Two-sided 97.5% quantiles of Student's t for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

fn t_quantile(df: usize) -> f64 {
    T975.get(df.wrapping_sub(1)).copied().unwrap_or(1.96)
}

/// Fits `statistic ~ prefactor * eps^exponent` by least squares in log-log
/// coordinates.
pub fn scaling_regression(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: pairs.len(),
        });
    }
    if pairs.iter().any(|&(e, s)| !(e > 0.0) || !(s > 0.0)) {
        return Err(Error::Domain("scaling regression needs positive values"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let fit = least_squares(&xs, &ys)?;
    // classical standard error; the HC form is unreliable with four points
    let n = pairs.len();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - fit.intercept - fit.slope * x;
            e * e
        })
        .sum();
    let se = (rss / (n as f64 - 2.0) / sxx).sqrt();
    let half = t_quantile(n - 2) * se;
    Ok(ScalingFit {
        exponent: fit.slope,
        prefactor: fit.intercept.exp(),
        interval: (fit.slope - half, fit.slope + half),
        n,
    })
}

/// Empirical spacing profile: point `i` (abscissae ascending) carries mass
/// `scale * (N - 1 - i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingProfile {
    pub abscissae: Vec<f64>,
    pub masses: Vec<f64>,
    pub fit: Option<ExponentialFit>,
}

/// `mass ~ amplitude * exp(-rate * abscissa)`, fitted on positive masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Largest absolute deviation of the fit from the profile's masses.
    pub sup_residual: f64,
}

impl SpacingProfile {
    fn build(mut abscissae: Vec<f64>, scale: f64) -> Result<Self> {
        if abscissae.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: abscissae.len(),
            });
        }
        abscissae.sort_by(f64::total_cmp);
        let n = abscissae.len();
        let masses: Vec<f64> = (0..n).map(|i| scale * (n - 1 - i) as f64).collect();
        let fit = exponential_fit(&abscissae, &masses);
        Ok(Self {
            abscissae,
            masses,
            fit,
        })
    }

    /// Adaptive-predator snapshot: abscissae `(alpha_j - alpha_min) / eps`,
    /// each type weighing `eps`.
    pub fn from_attack_rates(alphas: &[f64], eps: f64) -> Result<Self> {
        let min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
        Self::build(alphas.iter().map(|a| (a - min) / eps).collect(), eps)
    }

    /// Death-rate snapshot in log coordinates `X = -ln(delta)`: abscissae
    /// `X_j - X_min`, each type weighing `exp(-X_min)`.
    pub fn from_log_death_rates(xs: &[f64]) -> Result<Self> {
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        Self::build(xs.iter().map(|x| x - min).collect(), (-min).exp())
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }
}

fn exponential_fit(xs: &[f64], masses: &[f64]) -> Option<ExponentialFit> {
    let (px, py): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(masses)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&x, &m)| (x, m.ln()))
        .unzip();
    let fit = least_squares(&px, &py).ok()?;
    let amplitude = fit.intercept.exp();
    let sup_residual = xs
        .iter()
        .zip(masses)
        .map(|(&x, &m)| (amplitude * (fit.slope * x).exp() - m).abs())
        .fold(0.0, f64::max);
    Some(ExponentialFit {
        amplitude,
        rate: -fit.slope,
        sup_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    /// Variance-to-mean ratio of the windowed counts.
    pub index: f64,
    pub mean: f64,
    pub events: usize,
    pub cells: usize,
}

/// Variance-to-mean ratio of event counts.
///
/// `[0, t_end]` is cut into `windows` equal windows. With several streams,
/// each window's counts are compared across streams and the per-window
/// indices are averaged, which is insensitive to a time-varying intensity.
/// A single stream is scored across its windows.
pub fn dispersion_test(streams: &[Vec<f64>], t_end: f64, windows: usize) -> Result<Dispersion> {
    if windows == 0 || !(t_end > 0.0) {
        return Err(Error::Domain("need a positive horizon and window count"));
    }
    let events: usize = streams
        .iter()
        .map(|s| s.iter().filter(|&&t| (0.0..=t_end).contains(&t)).count())
        .sum();
    if events < MIN_DISPERSION_EVENTS {
        return Err(Error::InsufficientData {
            needed: MIN_DISPERSION_EVENTS,
            got: events,
        });
    }
    let counts: Vec<Vec<f64>> = streams
        .iter()
        .map(|s| {
            let mut c = alloc::vec![0.0; windows];
            for &t in s.iter().filter(|&&t| (0.0..=t_end).contains(&t)) {
                let w = ((t / t_end) * windows as f64) as usize;
                c[w.min(windows - 1)] += 1.0;
            }
            c
        })
        .collect();
    let ratio = |xs: &mut dyn Iterator<Item = f64>| -> Option<(f64, f64)> {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        if mean == 0.0 || v.len() < 2 {
            return None;
        }
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Some((var / mean, mean))
    };
    let (index, mean) = if streams.len() == 1 {
        ratio(&mut counts[0].iter().copied()).ok_or(Error::InsufficientData {
            needed: 2,
            got: windows,
        })?
    } else {
        let mut total = 0.0;
        let mut mean = 0.0;
        let mut used = 0;
        for w in 0..windows {
            if let Some((r, m)) = ratio(&mut counts.iter().map(|c| c[w])) {
                total += r;
                mean += m;
                used += 1;
            }
        }
        if used == 0 {
            return Err(Error::InsufficientData {
                needed: MIN_DISPERSION_EVENTS,
                got: events,
            });
        }
        (total / used as f64, mean / used as f64)
    };
    Ok(Dispersion {
        index,
        mean,
        events,
        cells: streams.len() * windows,
    })
}
