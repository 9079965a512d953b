//! One replicate of each experiment, as plain data. Nothing here touches the
//! file system.

use anyhow::{bail, Result};
use ppevo_core::analysis::{slope_estimate, SlopeEstimate, SpacingProfile, TrajectorySample};
use ppevo_core::brw::{simulate_brw, BrwConfig, BrwRun};
use ppevo_core::evolution::{
    canonical_ode, Apep, ApepConfig, Dpep, DpepConfig, EventRecord, PredatorEp, PredatorEpConfig,
    PreyEp, PreyEpConfig,
};
use ppevo_core::lv::{PredatorTrait, PreyTrait, SystemParams};
use ppevo_core::RngStream;

#[derive(Debug, Clone, Copy)]
pub struct PreyEpSettings {
    pub epsilon: f64,
    pub delta: f64,
    pub founder: PreyTrait,
    /// Horizon in rescaled time `eps * t`.
    pub horizon: f64,
    /// Sampling step in rescaled time.
    pub sample_dt: f64,
}

impl PreyEpSettings {
    /// Canonical-equation path on the sampling grid.
    pub fn canonical(&self) -> Result<Vec<(f64, PreyTrait)>> {
        const SUBSTEPS: usize = 10;
        let path = canonical_ode(self.founder, self.delta, self.horizon, self.sample_dt / SUBSTEPS as f64)?;
        Ok(path.into_iter().step_by(SUBSTEPS).collect())
    }
}

#[derive(Debug, Clone)]
pub struct PreyEpOutcome {
    pub events: Vec<EventRecord>,
    /// `(eps t, first resident, live types)` on the canonical grid.
    pub path: Vec<(f64, PreyTrait, usize)>,
    pub dimorphic_fraction: f64,
    /// Coexistence-event times in rescaled time.
    pub coexistence_times: Vec<f64>,
    /// Largest distance between the first resident and the canonical path.
    pub sup_distance: f64,
    pub absorbed: bool,
}

pub fn prey_ep(s: &PreyEpSettings, canonical: &[(f64, PreyTrait)], rng: &mut RngStream) -> Result<PreyEpOutcome> {
    let mut ep = PreyEp::new(s.founder, PreyEpConfig::new(s.epsilon, s.delta))?;
    let mut events = Vec::new();
    let mut path = Vec::with_capacity(canonical.len());
    let mut sup: f64 = 0.0;
    for &(t, y) in canonical {
        ep.run_until(t / s.epsilon, rng, Some(&mut events));
        let st = ep.state();
        let Some(y1) = st.y1 else {
            sup = f64::INFINITY;
            break;
        };
        sup = sup.max((y1.alpha - y.alpha).hypot(y1.beta - y.beta));
        path.push((t, y1, st.residents().len()));
    }
    let st = ep.state();
    Ok(PreyEpOutcome {
        events,
        path,
        dimorphic_fraction: st.dimorphic_time / (s.horizon / s.epsilon),
        coexistence_times: st.coexistence_event_times.iter().map(|t| t * s.epsilon).collect(),
        sup_distance: sup,
        absorbed: ep.is_absorbed(),
    })
}

#[derive(Debug, Clone)]
pub struct PredatorEpSettings {
    pub epsilon: f64,
    pub params: SystemParams,
    pub founder: PredatorTrait,
    pub mutations: u64,
    pub sample_every: u64,
    /// Mutation counts at which the full coexisting set is recorded.
    pub snapshots: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct PredatorEpOutcome {
    pub events: Vec<EventRecord>,
    /// Indexed by mutation count.
    pub n_types: TrajectorySample,
    pub mean_alpha: TrajectorySample,
    pub mean_log_ell: TrajectorySample,
    pub snapshots: Vec<(u64, Vec<PredatorTrait>)>,
}

pub fn predator_ep(s: &PredatorEpSettings, rng: &mut RngStream) -> Result<PredatorEpOutcome> {
    let mut ep = PredatorEp::new(s.founder, PredatorEpConfig::new(s.epsilon, s.params))?;
    let every = s.sample_every.max(1);
    let mut out = PredatorEpOutcome {
        events: Vec::with_capacity(s.mutations as usize),
        n_types: TrajectorySample::new(),
        mean_alpha: TrajectorySample::new(),
        mean_log_ell: TrajectorySample::new(),
        snapshots: Vec::new(),
    };
    let record = |out: &mut PredatorEpOutcome, ep: &PredatorEp, n: u64| -> Result<()> {
        let n = n as f64;
        out.n_types.push(n, ep.predators().len() as f64)?;
        out.mean_alpha.push(n, ep.mean_alpha())?;
        out.mean_log_ell.push(n, ep.mean_log_ell())?;
        Ok(())
    };
    record(&mut out, &ep, 0)?;
    for n in 1..=s.mutations {
        out.events.push(ep.step(rng));
        if n % every == 0 {
            record(&mut out, &ep, n)?;
        }
        if s.snapshots.contains(&n) {
            out.snapshots.push((n, ep.predators().to_vec()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct ApepSettings {
    pub epsilon: f64,
    pub params: SystemParams,
    pub alpha0: f64,
    pub steps: u64,
    pub sample_every: u64,
    /// Time averages use mutations after this fraction of the run.
    pub average_from: f64,
    pub keep_events: bool,
}

#[derive(Debug, Clone)]
pub struct ApepOutcome {
    pub events: Vec<EventRecord>,
    pub n_types: TrajectorySample,
    pub alpha_min: TrajectorySample,
    pub max_len: usize,
    /// Largest count of types at least `eps / 4` above the minimum.
    pub max_quarter_count: usize,
    pub mean_len: f64,
    /// Time average of `alpha_max - alpha_min`.
    pub mean_spread: f64,
    /// Slope of `alpha_min(n)` after burn-in.
    pub speed: SlopeEstimate,
    pub profile: SpacingProfile,
}

pub fn apep(s: &ApepSettings, rng: &mut RngStream) -> Result<ApepOutcome> {
    let mut ep = Apep::new(
        s.alpha0,
        ApepConfig {
            epsilon: s.epsilon,
            params: s.params,
        },
    )?;
    let every = s.sample_every.max(1);
    let from = (s.average_from * s.steps as f64) as u64;
    let mut events = Vec::new();
    let mut n_types = TrajectorySample::new();
    let mut alpha_min = TrajectorySample::new();
    n_types.push(0.0, 1.0)?;
    alpha_min.push(0.0, s.alpha0)?;
    let (mut len_sum, mut spread_sum, mut count) = (0.0, 0.0, 0usize);
    let mut max_quarter = ep.count_above_quarter_step();
    for n in 1..=s.steps {
        let ev = ep.step(rng);
        if s.keep_events {
            events.push(ev);
        }
        max_quarter = max_quarter.max(ep.count_above_quarter_step());
        if n > from {
            len_sum += ep.len() as f64;
            spread_sum += ep.alpha_max() - ep.alpha_min();
            count += 1;
        }
        if n % every == 0 {
            n_types.push(n as f64, ep.len() as f64)?;
            alpha_min.push(n as f64, ep.alpha_min())?;
        }
    }
    if count == 0 {
        bail!("averaging window is empty");
    }
    let speed = slope_estimate(&alpha_min, ppevo_core::analysis::DEFAULT_BURN_IN)?;
    let profile = SpacingProfile::from_attack_rates(ep.alphas(), s.epsilon)?;
    Ok(ApepOutcome {
        events,
        n_types,
        alpha_min,
        max_len: ep.max_len(),
        max_quarter_count: max_quarter,
        mean_len: len_sum / count as f64,
        mean_spread: spread_sum / count as f64,
        speed,
        profile,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DpepSettings {
    pub params: SystemParams,
    pub x0: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub burn_in: f64,
    pub keep_events: bool,
}

#[derive(Debug, Clone)]
pub struct DpepOutcome {
    pub events: Vec<EventRecord>,
    pub event_count: u64,
    pub x_max: TrajectorySample,
    pub x_min: TrajectorySample,
    pub n_types: TrajectorySample,
    pub speed_max: SlopeEstimate,
    pub speed_min: SlopeEstimate,
    pub final_len: usize,
    /// `(1/t) log N_t` at the final time.
    pub log_growth: f64,
    pub profile: SpacingProfile,
}

pub fn dpep(s: &DpepSettings, rng: &mut RngStream) -> Result<DpepOutcome> {
    let mut d = Dpep::new(s.x0, DpepConfig::new(s.params))?;
    let mut events = Vec::new();
    let (mut x_max, mut x_min, mut n_types) = (
        TrajectorySample::new(),
        TrajectorySample::new(),
        TrajectorySample::new(),
    );
    let push = |d: &Dpep, t: f64, a: &mut TrajectorySample, b: &mut TrajectorySample, c: &mut TrajectorySample| {
        a.push(t, d.x_max())?;
        b.push(t, d.x_min())?;
        c.push(t, d.len() as f64)
    };
    push(&d, 0.0, &mut x_max, &mut x_min, &mut n_types)?;
    let steps = (s.t_end / s.sample_dt).round() as usize;
    for i in 1..=steps {
        let t = if i == steps { s.t_end } else { i as f64 * s.sample_dt };
        d.run_until(t, rng, s.keep_events.then_some(&mut events));
        push(&d, t, &mut x_max, &mut x_min, &mut n_types)?;
    }
    let speed_max = slope_estimate(&x_max, s.burn_in)?;
    let speed_min = slope_estimate(&x_min, s.burn_in)?;
    Ok(DpepOutcome {
        events,
        event_count: d.events(),
        speed_max,
        speed_min,
        final_len: d.len(),
        log_growth: (d.len() as f64).ln() / s.t_end,
        profile: SpacingProfile::from_log_death_rates(d.xs())?,
        x_max,
        x_min,
        n_types,
    })
}

/// One branching random walk from the origin, sampled every `sample_dt`.
pub fn brw(t_end: f64, sample_dt: f64, config: BrwConfig, rng: &mut RngStream) -> BrwRun {
    let steps = (t_end / sample_dt).floor() as usize;
    let times: Vec<f64> = (1..=steps).map(|i| i as f64 * sample_dt).collect();
    simulate_brw(0.0, t_end, config, &times, rng)
}
