use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ppevo_core::analysis::{dispersion_test, scaling_regression};
use ppevo_core::brw::{
    killed_growth_exponent, lambda, solve_speed_a, solve_speed_b, simulate_toy, BrwConfig,
    KillBoundary, RunStatus,
};
use ppevo_core::evolution::CANONICAL_DRIFT;
use ppevo_core::lv::{
    coexisting_set, invadability_curves, is_viable, one_prey_equilibrium, predator_equilibrium,
    saturated_equilibrium, PredatorTrait, PreyTrait, SystemParams,
};
use ppevo_core::{Error, RngStream};

use crate::experiments::{self, ApepSettings, DpepSettings, PredatorEpSettings, PreyEpSettings};
use crate::output::{mean_se, num, Sink, Summary};
use crate::pool::{default_workers, run_replicates};
use crate::recipe::recipe_args;
use crate::replay::{meta_path, replay_file, LogKind};

/// Invalid parameter values, reported like a command-line usage error.
#[derive(Debug, thiserror::Error)]
#[error("invalid configuration: {0}")]
struct Usage(String);

macro_rules! usage {
    ($($t:tt)*) => {
        return Err(Usage(format!($($t)*)).into())
    };
}

/// Exit status when a simulation hit its particle budget.
const EXIT_BUDGET: u8 = 3;
/// Exit status when a replayed log contains a violation.
const EXIT_VIOLATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ppevo", version, about = "Predator-prey evolution experiments", args_override_self = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed; replicate k draws from ChaCha stream k of this seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = "PPEVO_OUT", default_value = "ppevo-out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print the summary as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Front speeds a and b of the branching random walk.
    Rates,
    /// Closed-form equilibrium of a one-predator or one-prey community.
    Equilibrium(EquilibriumArgs),
    /// Prey evolution against a single predator.
    PreyEp(PreyEpArgs),
    /// Predator evolution in both traits against a single prey.
    PredatorEp(PredatorEpArgs),
    /// Predator evolution in the consumption rate only, in discrete time.
    Apep(ApepArgs),
    /// Predator evolution in the death rate only.
    Dpep(DpepArgs),
    /// Branching random walk, optionally killed at a moving barrier.
    Brw(BrwArgs),
    /// Growth exponent of the killed walk above a moving level.
    KilledBrw(KilledBrwArgs),
    /// Speeds of the M-particle branching-selection model.
    Toy(ToyArgs),
    /// Re-check an event log transition by transition.
    Replay(ReplayArgs),
    /// Run a TOML recipe; trailing flags override its keys.
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct Growth {
    /// Prey intrinsic growth rate r = beta - 1.
    #[arg(long, default_value_t = 1.0, conflicts_with = "beta")]
    r: f64,
    /// Prey birth rate beta (overrides --r).
    #[arg(long)]
    beta: Option<f64>,
}

impl Growth {
    fn params(&self) -> Result<SystemParams> {
        let beta = self.beta.unwrap_or(self.r + 1.0);
        Ok(SystemParams::new(beta, 1.0).map_err(|e| Usage(format!("--r/--beta: {e}")))?)
    }
}

#[derive(Args, Debug)]
struct EquilibriumArgs {
    /// Prey traits `alpha,beta`, several separated by `;`.
    #[arg(long)]
    preys: Option<String>,
    /// Predator death rate for --preys.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Predator traits `alpha,delta`, several separated by `;`.
    #[arg(long, conflicts_with = "preys")]
    predators: Option<String>,
    #[command(flatten)]
    growth: Growth,
    /// Write the invadability curves of the first prey.
    #[arg(long)]
    curves: bool,
    #[arg(long, default_value_t = 1.05)]
    alpha_min: f64,
    #[arg(long, default_value_t = 6.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
}

#[derive(Args, Debug)]
struct PreyEpArgs {
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 4.0)]
    beta0: f64,
    /// Horizon in rescaled time eps * t.
    #[arg(long, default_value_t = 2.0)]
    horizon: f64,
    /// Sampling step in rescaled time.
    #[arg(long, default_value_t = 0.01)]
    sample_dt: f64,
    /// Windows for the coexistence-event dispersion index.
    #[arg(long, default_value_t = 1)]
    windows: usize,
}

#[derive(Args, Debug)]
struct PredatorEpArgs {
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[command(flatten)]
    growth: Growth,
    #[arg(long, default_value_t = 3.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 0.45)]
    delta0: f64,
    #[arg(long, default_value_t = 20_000)]
    mutations: u64,
    #[arg(long, default_value_t = 10)]
    sample_every: u64,
    /// Mutation counts at which the coexisting set is written out.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u64>,
}

#[derive(Args, Debug)]
struct ApepArgs {
    /// One or more mutation sizes; four or more also fit the scaling exponents.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    epsilon: Vec<f64>,
    #[command(flatten)]
    growth: Growth,
    #[arg(long, default_value_t = 3.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 50_000)]
    n: u64,
    #[arg(long, default_value_t = 10)]
    sample_every: u64,
    /// Time averages start after this fraction of the run.
    #[arg(long, default_value_t = 0.5)]
    average_from: f64,
    /// Skip the per-event logs.
    #[arg(long)]
    no_events: bool,
}

#[derive(Args, Debug)]
struct DpepArgs {
    #[command(flatten)]
    growth: Growth,
    /// Founder trait X = -log delta.
    #[arg(long, default_value_t = 2.5)]
    x0: f64,
    #[arg(long, default_value_t = 20.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.1)]
    sample_dt: f64,
    #[arg(long, default_value_t = 0.3)]
    burn_in: f64,
    #[arg(long)]
    no_events: bool,
}

#[derive(Args, Debug)]
struct BrwArgs {
    #[arg(long, default_value_t = 5.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    sample_dt: f64,
    /// Barrier speed; the walk is unkilled when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    /// Barrier starts at -offset.
    #[arg(long, default_value_t = 10.0)]
    offset: f64,
    /// Largest number of live particles.
    #[arg(long, default_value_t = 4_000_000)]
    budget: usize,
}

#[derive(Args, Debug)]
struct KilledBrwArgs {
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    #[arg(long, default_value_t = 0.4)]
    c: f64,
    #[arg(long, default_value_t = 10.0)]
    offset: f64,
    #[arg(long, default_value_t = 13.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.25)]
    sample_dt: f64,
    #[arg(long, default_value_t = 0.3)]
    burn_in: f64,
    #[arg(long, default_value_t = 4_000_000)]
    budget: usize,
}

#[derive(Args, Debug)]
struct ToyArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256")]
    m: Vec<usize>,
    #[arg(long, default_value_t = 2000.0)]
    t_end: f64,
    /// Leader samples per run.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Event log; its `.meta.json` sidecar supplies the process parameters.
    log: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    recipe: PathBuf,
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

struct Ctx {
    common: Common,
    sink: Sink,
    out: Mutex<Vec<u8>>,
}

impl Ctx {
    fn replicates(&self) -> usize {
        self.common.replicates as usize
    }

    fn workers(&self) -> usize {
        self.common.workers.unwrap_or_else(default_workers)
    }

    fn rng(&self, k: usize) -> RngStream {
        RngStream::replicate(self.common.seed, k as u64)
    }

    fn summary(&self, kind: &str) -> Summary {
        Summary::new(kind, self.common.seed, self.replicates())
    }

    fn finish(&self, mut summary: Summary, status: Outcome) -> Result<Outcome> {
        let path = self.sink.path(&format!("{}-summary.json", summary.experiment));
        summary.file(&path);
        self.sink.json(&format!("{}-summary.json", summary.experiment), &summary)?;
        let mut out = self.out.lock().expect("output buffer");
        if self.common.json {
            writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
        } else if !self.common.quiet {
            write!(out, "{}", summary.render())?;
        }
        Ok(status)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Done,
    Budget,
    Violation,
}

/// Runs the command line `args` (program name first), writing reports to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&args) {
        Ok(Parsed::Cli(cli)) => cli,
        Ok(Parsed::Early(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().ansi().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return 2;
        }
    };
    let mut buffer = Vec::new();
    let result = dispatch(cli, &mut buffer);
    let _ = out.write_all(&buffer);
    let _ = out.flush();
    match result {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Budget) => {
            let _ = writeln!(err, "error: particle budget exceeded; partial results written");
            EXIT_BUDGET
        }
        Ok(Outcome::Violation) => EXIT_VIOLATION,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

enum Parsed {
    Cli(Cli),
    Early(clap::Error),
}

/// Parses the command line, expanding `run <recipe>` into the recipe's
/// subcommand with the remaining flags appended.
fn parse(args: &[OsString]) -> Result<Parsed> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return Ok(Parsed::Early(e)),
    };
    let Command::Run(run) = &cli.command else {
        return Ok(Parsed::Cli(cli));
    };
    let mut argv: Vec<OsString> = vec!["ppevo".into()];
    let raw = &args[1.min(args.len())..];
    let at = raw.iter().position(|a| a == "run").context("locating `run`")?;
    argv.extend(raw[..at].iter().cloned());
    argv.extend(recipe_args(&run.recipe)?.into_iter().map(OsString::from));
    let mut rest = raw[at + 1..].to_vec();
    if let Some(i) = rest.iter().position(|a| std::path::Path::new(a) == run.recipe) {
        rest.remove(i);
    }
    argv.extend(rest);
    let expanded = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => return Ok(Parsed::Early(e)),
    };
    if matches!(expanded.command, Command::Run(_)) {
        bail!("a recipe cannot invoke `run`");
    }
    Ok(Parsed::Cli(expanded))
}

fn dispatch(cli: Cli, out: &mut Vec<u8>) -> Result<Outcome> {
    if let Command::Replay(a) = &cli.command {
        return replay(&cli.common, a, out);
    }
    let ctx = Ctx {
        sink: Sink::new(&cli.common.out)?,
        common: cli.common,
        out: Mutex::new(Vec::new()),
    };
    let result = dispatch_with(&ctx, cli.command);
    out.extend(ctx.out.into_inner().expect("output buffer"));
    result
}

fn dispatch_with(ctx: &Ctx, command: Command) -> Result<Outcome> {
    match command {
        Command::Rates => rates(ctx),
        Command::Equilibrium(a) => equilibrium(ctx, &a),
        Command::PreyEp(a) => prey_ep(ctx, &a),
        Command::PredatorEp(a) => predator_ep(ctx, &a),
        Command::Apep(a) => apep(ctx, &a),
        Command::Dpep(a) => dpep(ctx, &a),
        Command::Brw(a) => brw(ctx, &a),
        Command::KilledBrw(a) => killed_brw(ctx, &a),
        Command::Toy(a) => toy(ctx, &a),
        Command::Replay(_) | Command::Run(_) => unreachable!("handled above"),
    }
}

fn rates(ctx: &Ctx) -> Result<Outcome> {
    let (a, b) = (solve_speed_a(), solve_speed_b());
    let mut s = Summary::new("rates", ctx.common.seed, 1);
    s.push("a", a, None, 1, None);
    s.push("b", b, None, 1, None);
    s.push("residual_a", lambda(a)? + 1.0, None, 1, Some(0.0));
    s.push("residual_b", lambda(b)? + 1.0 - b, None, 1, Some(0.0));
    ctx.finish(s, Outcome::Done)
}

fn parse_pairs(text: &str, what: &str) -> Result<Vec<(f64, f64)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let v: Vec<&str> = pair.split(',').map(str::trim).collect();
            let [x, y] = v[..] else {
                usage!("{what}: expected `x,y`, got `{pair}`");
            };
            Ok((
                x.parse().with_context(|| format!("{what}: `{x}`"))?,
                y.parse().with_context(|| format!("{what}: `{y}`"))?,
            ))
        })
        .collect()
}

fn equilibrium(ctx: &Ctx, a: &EquilibriumArgs) -> Result<Outcome> {
    let mut s = Summary::new("equilibrium", ctx.common.seed, 1);
    if let Some(text) = &a.predators {
        let params = a.growth.params()?;
        let preds: Vec<PredatorTrait> = parse_pairs(text, "--predators")?
            .into_iter()
            .map(|(al, de)| PredatorTrait::new(al, de))
            .collect::<Result<_, Error>>()?;
        let live = coexisting_set(&preds, params);
        let eq = predator_equilibrium(&live, params)?;
        s.push("prey", eq.prey[0], None, 1, None);
        for (p, v) in live.iter().zip(&eq.predators) {
            s.push(&format!("predator({},{})", num(p.alpha()), num(p.delta())), *v, None, 1, None);
        }
        s.push("coexisting", live.len() as f64, None, preds.len(), None);
        return ctx.finish(s, Outcome::Done);
    }
    let Some(text) = a.preys.as_deref() else {
        usage!("give --preys or --predators");
    };
    let prey: Vec<PreyTrait> = parse_pairs(text, "--preys")?
        .into_iter()
        .map(|(al, be)| PreyTrait::new(al, be))
        .collect();
    let first = *prey.first().context("--preys is empty")?;
    let viable = is_viable(first, a.delta);
    if prey.len() == 1 {
        let eq = one_prey_equilibrium(first, a.delta)?;
        s.push("prey", eq.prey[0], None, 1, None);
        s.push("predator", eq.predators[0], None, 1, None);
    } else {
        let eq = saturated_equilibrium(&prey, a.delta)?;
        for (p, u) in prey.iter().zip(&eq.prey) {
            s.push(&format!("prey({},{})", num(p.alpha), num(p.beta)), *u, None, 1, None);
        }
        s.push("predator", eq.predators[0], None, 1, None);
    }
    s.push("viable", if viable { 1.0 } else { 0.0 }, None, 1, None);
    if a.curves {
        if a.points < 2 || !(a.alpha_max > a.alpha_min) {
            usage!("--curves needs at least two points on a nonempty alpha range");
        }
        let rows = (0..a.points).map(|i| {
            let al = a.alpha_min + (a.alpha_max - a.alpha_min) * i as f64 / (a.points - 1) as f64;
            let (g, h) = invadability_curves(first, al, a.delta).unwrap_or((f64::NAN, f64::NAN));
            let edge = if al > a.delta { al / (al - a.delta) } else { f64::NAN };
            vec![num(al), num(g), num(h), num(edge)]
        });
        let path = ctx
            .sink
            .rows("equilibrium-curves.csv", &["alpha", "g", "h", "viable_boundary"], rows)?;
        s.file(&path);
    }
    ctx.finish(s, Outcome::Done)
}

fn prey_ep(ctx: &Ctx, a: &PreyEpArgs) -> Result<Outcome> {
    if !(a.epsilon > 0.0) || !(a.horizon > 0.0) || !(a.sample_dt > 0.0) {
        usage!("--epsilon, --horizon and --sample-dt must be positive");
    }
    let settings = PreyEpSettings {
        epsilon: a.epsilon,
        delta: a.delta,
        founder: PreyTrait::new(a.alpha0, a.beta0),
        horizon: a.horizon,
        sample_dt: a.sample_dt,
    };
    let canonical = settings.canonical().context("founder must lie in the viable region")?;
    let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
        experiments::prey_ep(&settings, &canonical, &mut ctx.rng(k))
    });
    let mut s = ctx.summary("prey-ep");
    let rows = canonical.iter().map(|(t, y)| vec![num(*t), num(y.alpha), num(y.beta)]);
    s.file(&ctx.sink.rows("prey-ep-canonical.csv", &["time", "alpha", "beta"], rows)?);
    let meta = LogKind::PreyEp {
        epsilon: a.epsilon,
        delta: a.delta,
    };
    let (mut frac, mut sup, mut streams) = (vec![], vec![], vec![]);
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        let stem = format!("prey-ep-r{k:03}");
        write_events(ctx, &mut s, &stem, [a.alpha0, a.beta0], &run.events, meta)?;
        let rows = run
            .path
            .iter()
            .map(|(t, y, n)| vec![num(*t), num(y.alpha), num(y.beta), n.to_string()]);
        s.file(&ctx.sink.rows(&format!("{stem}-path.csv"), &["time", "alpha", "beta", "live_types"], rows)?);
        if run.absorbed {
            s.warnings.push(format!("replicate {k} left the viable region"));
        }
        frac.push(run.dimorphic_fraction);
        sup.push(run.sup_distance);
        streams.push(run.coexistence_times);
    }
    let n = frac.len();
    let (m, se) = mean_se(&frac);
    s.push("dimorphic_fraction", m, se, n, None);
    let (m, se) = mean_se(&sup);
    s.push("sup_distance_to_canonical", m, se, n, None);
    s.push("canonical_drift", CANONICAL_DRIFT, None, 1, None);
    let events: usize = streams.iter().map(Vec::len).sum();
    s.push("coexistence_events", events as f64, None, n, None);
    match dispersion_test(&streams, a.horizon, a.windows.max(1)) {
        Ok(d) => s.push("dispersion_index", d.index, None, d.cells, Some(1.0)),
        Err(e) => s.warnings.push(format!("dispersion index unavailable: {e}")),
    }
    ctx.finish(s, Outcome::Done)
}

fn write_events(
    ctx: &Ctx,
    s: &mut Summary,
    stem: &str,
    founder: [f64; 2],
    events: &[ppevo_core::evolution::EventRecord],
    meta: LogKind,
) -> Result<()> {
    let path = ctx.sink.events(&format!("{stem}-events.csv"), founder, events)?;
    let sidecar = meta_path(&path);
    ctx.sink
        .json(sidecar.file_name().unwrap().to_str().unwrap(), &meta)?;
    s.file(&path);
    s.file(&sidecar);
    Ok(())
}

fn predator_ep(ctx: &Ctx, a: &PredatorEpArgs) -> Result<Outcome> {
    let params = a.growth.params()?;
    let settings = PredatorEpSettings {
        epsilon: a.epsilon,
        params,
        founder: PredatorTrait::new(a.alpha0, a.delta0)?,
        mutations: a.mutations,
        sample_every: a.sample_every,
        snapshots: a.snapshots.clone(),
    };
    let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
        experiments::predator_ep(&settings, &mut ctx.rng(k))
    });
    let mut s = ctx.summary("predator-ep");
    let meta = LogKind::PredatorEp {
        epsilon: a.epsilon,
        beta: params.beta(),
    };
    let (mut len, mut dalpha, mut dell) = (vec![], vec![], vec![]);
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        let stem = format!("predator-ep-r{k:03}");
        write_events(ctx, &mut s, &stem, [a.alpha0, a.delta0], &run.events, meta)?;
        s.file(&ctx.sink.trajectory(&format!("{stem}-n-types.csv"), &run.n_types)?);
        s.file(&ctx.sink.trajectory(&format!("{stem}-mean-alpha.csv"), &run.mean_alpha)?);
        s.file(&ctx.sink.trajectory(&format!("{stem}-mean-log-ell.csv"), &run.mean_log_ell)?);
        for (n, preds) in &run.snapshots {
            let rows = preds
                .iter()
                .map(|p| vec![num(p.alpha()), num(p.delta()), num(p.ell())]);
            s.file(&ctx.sink.rows(&format!("{stem}-snapshot-{n}.csv"), &["alpha", "delta", "ell"], rows)?);
        }
        let last = |t: &ppevo_core::analysis::TrajectorySample| *t.values.last().unwrap() - t.values[0];
        len.push(*run.n_types.values.last().unwrap());
        dalpha.push(last(&run.mean_alpha));
        dell.push(last(&run.mean_log_ell));
    }
    let n = len.len();
    let (m, se) = mean_se(&len);
    s.push("final_types", m, se, n, None);
    let (m, se) = mean_se(&dalpha);
    s.push("mean_alpha_change", m, se, n, None);
    let (m, se) = mean_se(&dell);
    s.push("mean_log_ell_change", m, se, n, None);
    ctx.finish(s, Outcome::Done)
}

fn apep(ctx: &Ctx, a: &ApepArgs) -> Result<Outcome> {
    let params = a.growth.params()?;
    if a.epsilon.iter().any(|&e| !(e > 0.0)) {
        usage!("--epsilon values must be positive");
    }
    let mut s = ctx.summary("apep");
    let mut scaling = Vec::new();
    for &eps in &a.epsilon {
        let settings = ApepSettings {
            epsilon: eps,
            params,
            alpha0: a.alpha0,
            steps: a.n,
            sample_every: a.sample_every,
            average_from: a.average_from,
            keep_events: !a.no_events,
        };
        let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
            experiments::apep(&settings, &mut ctx.rng(k))
        });
        let tag = format!("eps{}", num(eps));
        let meta = LogKind::Apep {
            epsilon: eps,
            beta: params.beta(),
        };
        let (mut speed, mut maxlen, mut quarter, mut len, mut spread) = (vec![], vec![], vec![], vec![], vec![]);
        let (mut rate, mut resid) = (vec![], vec![]);
        for (k, run) in runs.into_iter().enumerate() {
            let run = run?;
            let stem = format!("apep-{tag}-r{k:03}");
            if !a.no_events {
                write_events(ctx, &mut s, &stem, [a.alpha0, 1.0], &run.events, meta)?;
            }
            s.file(&ctx.sink.trajectory(&format!("{stem}-n-types.csv"), &run.n_types)?);
            s.file(&ctx.sink.trajectory(&format!("{stem}-alpha-min.csv"), &run.alpha_min)?);
            s.file(&ctx.sink.profile(&format!("{stem}-profile.csv"), &run.profile)?);
            speed.push(run.speed.slope);
            maxlen.push(run.max_len as f64);
            quarter.push(run.max_quarter_count as f64);
            len.push(run.mean_len);
            spread.push(run.mean_spread);
            if let Some(fit) = run.profile.fit {
                rate.push(fit.rate);
                resid.push(fit.sup_residual);
            }
        }
        let n = speed.len();
        let bound = (4.0 * params.r() / eps).ceil();
        let (m, se) = mean_se(&speed);
        s.push(&format!("{tag}/alpha_min_speed"), m, se, n, None);
        s.push(&format!("{tag}/max_types"), maxlen.iter().copied().fold(0.0, f64::max), None, n, Some(bound));
        s.push(&format!("{tag}/max_above_quarter_step"), quarter.iter().copied().fold(0.0, f64::max), None, n, Some(bound));
        let (ml, se) = mean_se(&len);
        s.push(&format!("{tag}/mean_types"), ml, se, n, None);
        let (ms, se) = mean_se(&spread);
        s.push(&format!("{tag}/mean_spread"), ms, se, n, None);
        push_fit(&mut s, &format!("{tag}/"), &rate, &resid);
        scaling.push((eps, ml, ms));
    }
    if scaling.len() >= 4 {
        let rows = scaling
            .iter()
            .map(|(e, l, sp)| vec![num(*e), num(1.0 / l), num(*sp)]);
        s.file(&ctx.sink.rows("apep-scaling.csv", &["epsilon", "inverse_mean_types", "mean_spread"], rows)?);
        let inv: Vec<(f64, f64)> = scaling.iter().map(|&(e, l, _)| (e, 1.0 / l)).collect();
        let spr: Vec<(f64, f64)> = scaling.iter().map(|&(e, _, sp)| (e, sp)).collect();
        for (name, pairs) in [("inverse_mean_types_exponent", inv), ("mean_spread_exponent", spr)] {
            let fit = scaling_regression(&pairs)?;
            let half = (fit.interval.1 - fit.interval.0) / 2.0;
            s.push(name, fit.exponent, Some(half / 1.96), fit.n, Some(1.0));
        }
    }
    ctx.finish(s, Outcome::Done)
}

fn dpep(ctx: &Ctx, a: &DpepArgs) -> Result<Outcome> {
    let params = a.growth.params()?;
    let settings = DpepSettings {
        params,
        x0: a.x0,
        t_end: a.t_end,
        sample_dt: a.sample_dt,
        burn_in: a.burn_in,
        keep_events: !a.no_events,
    };
    let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
        experiments::dpep(&settings, &mut ctx.rng(k))
    });
    let mut s = ctx.summary("dpep");
    let meta = LogKind::Dpep { beta: params.beta() };
    let (mut vmax, mut vmin, mut growth, mut len, mut events) = (vec![], vec![], vec![], vec![], vec![]);
    let (mut rate, mut resid) = (vec![], vec![]);
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        let stem = format!("dpep-r{k:03}");
        if !a.no_events {
            write_events(ctx, &mut s, &stem, [a.x0, (-a.x0).exp()], &run.events, meta)?;
        }
        s.file(&ctx.sink.trajectory(&format!("{stem}-x-max.csv"), &run.x_max)?);
        s.file(&ctx.sink.trajectory(&format!("{stem}-x-min.csv"), &run.x_min)?);
        s.file(&ctx.sink.trajectory(&format!("{stem}-n-types.csv"), &run.n_types)?);
        s.file(&ctx.sink.profile(&format!("{stem}-profile.csv"), &run.profile)?);
        vmax.push(run.speed_max.slope);
        vmin.push(run.speed_min.slope);
        growth.push(run.log_growth);
        len.push(run.final_len as f64);
        events.push(run.event_count as f64);
        if let Some(fit) = run.profile.fit {
            rate.push(fit.rate);
            resid.push(fit.sup_residual);
        }
    }
    let n = vmax.len();
    let (m, se) = mean_se(&vmax);
    s.push("x_max_speed", m, se, n, Some(solve_speed_a()));
    let (m, se) = mean_se(&vmin);
    s.push("x_min_speed", m, se, n, Some(solve_speed_b()));
    let (m, se) = mean_se(&growth);
    s.push("log_types_over_t", m, se, n, Some(solve_speed_b()));
    let (m, se) = mean_se(&len);
    s.push("final_types", m, se, n, None);
    let (m, se) = mean_se(&events);
    s.push("events", m, se, n, None);
    push_fit(&mut s, "", &rate, &resid);
    ctx.finish(s, Outcome::Done)
}

/// Exponential fit of the final spacing profiles.
fn push_fit(s: &mut Summary, prefix: &str, rate: &[f64], resid: &[f64]) {
    if rate.is_empty() {
        return;
    }
    let (m, se) = mean_se(rate);
    s.push(&format!("{prefix}profile_fit_rate"), m, se, rate.len(), None);
    let (m, se) = mean_se(resid);
    s.push(&format!("{prefix}profile_sup_residual"), m, se, resid.len(), None);
}

fn brw(ctx: &Ctx, a: &BrwArgs) -> Result<Outcome> {
    let config = BrwConfig {
        boundary: a.gamma.map(|slope| KillBoundary {
            offset: a.offset,
            slope,
        }),
        budget: a.budget,
    };
    let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
        experiments::brw(a.t_end, a.sample_dt, config, &mut ctx.rng(k))
    });
    let mut s = ctx.summary("brw");
    let (mut counts, mut fronts) = (vec![], vec![]);
    let (mut extinct, mut over) = (0usize, 0usize);
    for (k, run) in runs.iter().enumerate() {
        let rows = run
            .samples
            .iter()
            .map(|p| vec![num(p.t), p.count.to_string(), num(p.max), num(p.min)]);
        s.file(&ctx.sink.rows(&format!("brw-r{k:03}-samples.csv"), &["time", "count", "max", "min"], rows)?);
        match run.status {
            RunStatus::Completed => {
                counts.push(run.state.positions.len() as f64);
                let max = run.state.positions.iter().copied().fold(f64::MIN, f64::max);
                fronts.push(max / a.t_end);
            }
            RunStatus::Extinct => {
                extinct += 1;
                counts.push(0.0);
            }
            RunStatus::BudgetExceeded => over += 1,
        }
    }
    if !counts.is_empty() {
        let (m, se) = mean_se(&counts);
        let target = a.gamma.is_none().then(|| a.t_end.exp());
        s.push("count", m, se, counts.len(), target);
    }
    if !fronts.is_empty() {
        let (m, se) = mean_se(&fronts);
        s.push("rightmost_over_t", m, se, fronts.len(), Some(solve_speed_a()));
    }
    s.push("extinction_fraction", extinct as f64 / runs.len() as f64, None, runs.len(), None);
    if over > 0 {
        s.warnings.push(format!("{over} replicates exceeded the particle budget"));
        return ctx.finish(s, Outcome::Budget);
    }
    ctx.finish(s, Outcome::Done)
}

fn killed_brw(ctx: &Ctx, a: &KilledBrwArgs) -> Result<Outcome> {
    let mut s = ctx.summary("killed-brw");
    let target = 1.0 + lambda(a.c)?;
    match killed_growth_exponent(
        a.gamma,
        a.c,
        a.offset,
        a.t_end,
        a.sample_dt,
        a.burn_in,
        ctx.replicates(),
        ctx.common.seed,
        a.budget,
    ) {
        Ok(g) => {
            s.push("exponent", g.exponent, Some(g.stderr), g.survivors, Some(target));
            s.push("ratio", g.ratio, None, g.survivors, Some(target));
            s.push("extinction_fraction", g.extinction_fraction, None, g.replicates, None);
            ctx.finish(s, Outcome::Done)
        }
        Err(Error::BudgetExceeded { budget, time }) => {
            s.warnings
                .push(format!("budget of {budget} particles exceeded at t = {}", num(time)));
            ctx.finish(s, Outcome::Budget)
        }
        Err(e) => Err(e.into()),
    }
}

fn toy(ctx: &Ctx, a: &ToyArgs) -> Result<Outcome> {
    if a.samples < 10 || !(a.t_end > 0.0) {
        usage!("--samples must be at least 10 and --t-end positive");
    }
    let mut s = ctx.summary("toy");
    let target = solve_speed_a();
    let mut rows = Vec::new();
    for &m in &a.m {
        let runs = run_replicates(ctx.replicates(), ctx.workers(), |k| {
            simulate_toy(m, a.t_end, a.t_end / a.samples as f64, &mut ctx.rng(k))
        });
        let speeds: Vec<f64> = runs
            .into_iter()
            .map(|r| r.map(|r| r.speed.slope))
            .collect::<Result<_, Error>>()?;
        let (mean, se) = mean_se(&speeds);
        s.push(&format!("a_{m}"), mean, se, speeds.len(), Some(target));
        rows.push(vec![m.to_string(), num(mean), se.map_or_else(String::new, num)]);
    }
    s.file(&ctx.sink.rows("toy-speeds.csv", &["M", "a_M", "stderr"], rows)?);
    ctx.finish(s, Outcome::Done)
}

fn replay(common: &Common, a: &ReplayArgs, out: &mut Vec<u8>) -> Result<Outcome> {
    let report = replay_file(&a.log, None)?;
    if common.json {
        let v = serde_json::json!({
            "events": report.events,
            "violations": usize::from(report.violation.is_some()),
            "line": report.violation.as_ref().map(|v| v.line),
            "reason": report.violation.as_ref().map(|v| v.reason.clone()),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else if !common.quiet || report.violation.is_some() {
        writeln!(out, "{}", report.render())?;
    }
    Ok(if report.violation.is_some() {
        Outcome::Violation
    } else {
        Outcome::Done
    })
}
