//! Re-checks an event log transition by transition.
//!
//! Each row names a parent by its rank in the ordered type list just before
//! the event. The replayer rebuilds that list, inserts the mutant, re-derives
//! which types survive and checks the coexistence condition on the result.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ppevo_core::evolution::fixed_delta_prefix;
use ppevo_core::lv::{
    check_fixed_alpha, check_fixed_delta, classify_prey_outcome, invasion_fitness, prefix_condition,
    sort_by_ratio, PredatorTrait, PreyTrait, SystemParams,
};
use serde::{Deserialize, Serialize};

use crate::output::EVENT_HEADER;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("parse error at line {line}: {message}")]
pub struct ParseError {
    pub line: u64,
    pub message: String,
}

/// Sidecar stored next to every event log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LogKind {
    PreyEp { epsilon: f64, delta: f64 },
    PredatorEp { epsilon: f64, beta: f64 },
    Apep { epsilon: f64, beta: f64 },
    Dpep { beta: f64 },
}

pub fn meta_path(log: &Path) -> PathBuf {
    log.with_extension("meta.json")
}

pub fn read_meta(log: &Path) -> Result<LogKind> {
    let path = meta_path(log);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub line: u64,
    pub index: u64,
    pub time: f64,
    pub parent: Option<usize>,
    pub mutant: [f64; 2],
    pub survivors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: u64,
    pub event: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub events: usize,
    pub violation: Option<Violation>,
}

impl Report {
    pub fn render(&self) -> String {
        match &self.violation {
            None => format!("{} events replayed, 0 violations", self.events),
            Some(v) => format!(
                "{} events replayed, violation at line {} (event {}): {}",
                self.events, v.line, v.event, v.reason
            ),
        }
    }
}

pub fn parse_log(text: &str) -> Result<Vec<Row>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| ParseError {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(EVENT_HEADER.iter().copied()) {
        return Err(ParseError {
            line: 1,
            message: format!("expected header {}", EVENT_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| ParseError {
            line,
            message: format!("invalid {what}"),
        };
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        rows.push(Row {
            line,
            index: field(0).parse().map_err(|_| bad("event_index"))?,
            time: field(1).parse().map_err(|_| bad("time"))?,
            parent: match field(2) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("parent_index"))?),
            },
            mutant: [
                field(3).parse().map_err(|_| bad("mutant_field_1"))?,
                field(4).parse().map_err(|_| bad("mutant_field_2"))?,
            ],
            survivors: field(5).parse().map_err(|_| bad("survivors"))?,
        });
    }
    if rows.first().map_or(true, |r| r.parent.is_some()) {
        return Err(ParseError {
            line: 2,
            message: "first row must be the founder with an empty parent index".into(),
        });
    }
    Ok(rows)
}

pub fn replay_file(log: &Path, kind: Option<LogKind>) -> Result<Report> {
    let kind = match kind {
        Some(k) => k,
        None => read_meta(log)?,
    };
    let text = std::fs::read_to_string(log).with_context(|| format!("reading {}", log.display()))?;
    let rows = parse_log(&text)?;
    replay(&rows, kind)
}

/// Ordered type list for one process kind.
trait Community {
    fn len(&self) -> usize;
    /// Checks the mutation kernel, inserts and truncates; returns the
    /// survivor count.
    fn apply(&mut self, parent: usize, mutant: [f64; 2]) -> Result<usize, String>;
    /// Coexistence condition on the current list.
    fn holds(&self) -> Result<(), String>;
}

const SLACK: f64 = 1e-9;

pub fn replay(rows: &[Row], kind: LogKind) -> Result<Report> {
    let founder = rows[0].mutant;
    let mut c: Box<dyn Community> = match kind {
        LogKind::PreyEp { epsilon, delta } => Box::new(PreyCommunity {
            residents: vec![PreyTrait::new(founder[0], founder[1])],
            epsilon,
            delta,
        }),
        LogKind::PredatorEp { epsilon, beta } => Box::new(PredatorCommunity {
            predators: vec![PredatorTrait::new(founder[0], founder[1])?],
            epsilon,
            params: SystemParams::new(beta, 1.0)?,
        }),
        LogKind::Apep { epsilon, beta } => Box::new(ApepCommunity {
            alphas: vec![founder[0]],
            epsilon,
            params: SystemParams::new(beta, 1.0)?,
        }),
        LogKind::Dpep { beta } => Box::new(DpepCommunity::new(founder[0], SystemParams::new(beta, 1.0)?)),
    };
    let mut report = Report {
        events: 0,
        violation: None,
    };
    let fail = |row: &Row, reason: String| Violation {
        line: row.line,
        event: row.index,
        reason,
    };
    if rows[0].survivors != 1 || rows[0].index != 0 {
        report.violation = Some(fail(&rows[0], "founder row must have index 0 and one survivor".into()));
        return Ok(report);
    }
    if let Err(e) = c.holds() {
        report.violation = Some(fail(&rows[0], format!("founder does not persist: {e}")));
        return Ok(report);
    }
    for pair in rows.windows(2) {
        let (prev, row) = (&pair[0], &pair[1]);
        let mut check = || -> Result<(), String> {
            if row.index != prev.index + 1 {
                return Err(format!("event index {} follows {}", row.index, prev.index));
            }
            if !(row.time >= prev.time) {
                return Err("time decreased".into());
            }
            let parent = row.parent.ok_or("missing parent index")?;
            if parent >= c.len() {
                return Err(format!("parent {parent} out of range for {} types", c.len()));
            }
            let n = c.apply(parent, row.mutant)?;
            if n != row.survivors {
                return Err(format!("log records {} survivors, replay gives {n}", row.survivors));
            }
            c.holds()
        };
        report.events += 1;
        if let Err(reason) = check() {
            report.violation = Some(fail(row, reason));
            break;
        }
    }
    Ok(report)
}

struct PreyCommunity {
    residents: Vec<PreyTrait>,
    epsilon: f64,
    delta: f64,
}

impl Community for PreyCommunity {
    fn len(&self) -> usize {
        self.residents.len()
    }

    fn apply(&mut self, parent: usize, m: [f64; 2]) -> Result<usize, String> {
        let p = self.residents[parent];
        let m = PreyTrait::new(m[0], m[1]);
        if (m.alpha - p.alpha).hypot(m.beta - p.beta) > self.epsilon * (1.0 + SLACK) {
            return Err("mutant outside the mutation disk".into());
        }
        if self.residents.contains(&m) {
            // a failed draw leaves the residents untouched
            return Ok(self.residents.len());
        }
        let out = classify_prey_outcome(&self.residents, m, self.delta).map_err(|e| e.to_string())?;
        let mut pool = self.residents.clone();
        pool.push(m);
        self.residents = out.prey.iter().map(|&i| pool[i]).collect();
        Ok(self.residents.len())
    }

    fn holds(&self) -> Result<(), String> {
        match self.residents[..] {
            [_] => Ok(()),
            [a, b] => {
                let ab = invasion_fitness(a, b, self.delta).map_err(|e| e.to_string())?;
                let ba = invasion_fitness(b, a, self.delta).map_err(|e| e.to_string())?;
                if ab > 0.0 && ba > 0.0 {
                    Ok(())
                } else {
                    Err("two live prey that are not mutually invadable".into())
                }
            }
            _ => Err(format!("{} live prey types", self.residents.len())),
        }
    }
}

struct PredatorCommunity {
    /// Increasing characteristic ratio.
    predators: Vec<PredatorTrait>,
    epsilon: f64,
    params: SystemParams,
}

impl Community for PredatorCommunity {
    fn len(&self) -> usize {
        self.predators.len()
    }

    fn apply(&mut self, parent: usize, m: [f64; 2]) -> Result<usize, String> {
        let p = self.predators[parent];
        let m = PredatorTrait::new(m[0], m[1]).map_err(|e| e.to_string())?;
        let tol = self.epsilon * (1.0 + SLACK);
        if (m.alpha() - p.alpha()).abs() > tol || (m.delta() / p.delta()).ln().abs() > tol {
            return Err("mutant outside the mutation kernel".into());
        }
        self.predators.push(m);
        sort_by_ratio(&mut self.predators);
        let ok = prefix_condition(&self.predators, self.params);
        let keep = ok.iter().rposition(|&b| b).map_or(0, |k| k + 1);
        self.predators.truncate(keep);
        Ok(keep)
    }

    fn holds(&self) -> Result<(), String> {
        if prefix_condition(&self.predators, self.params).last() == Some(&true) {
            Ok(())
        } else {
            Err("coexistence condition fails for the surviving predators".into())
        }
    }
}

struct ApepCommunity {
    /// Strictly decreasing.
    alphas: Vec<f64>,
    epsilon: f64,
    params: SystemParams,
}

impl Community for ApepCommunity {
    fn len(&self) -> usize {
        self.alphas.len()
    }

    fn apply(&mut self, parent: usize, m: [f64; 2]) -> Result<usize, String> {
        let a = m[0];
        if (a - self.alphas[parent]).abs() > self.epsilon * (1.0 + SLACK) {
            return Err("mutant outside the mutation kernel".into());
        }
        let at = self.alphas.partition_point(|&x| x > a);
        if self.alphas.get(at) == Some(&a) {
            return Err("mutant duplicates a resident".into());
        }
        self.alphas.insert(at, a);
        let keep = fixed_delta_prefix(&self.alphas, self.params);
        self.alphas.truncate(keep);
        Ok(keep)
    }

    fn holds(&self) -> Result<(), String> {
        if check_fixed_delta(&self.alphas, self.params) {
            Ok(())
        } else {
            Err("coexistence condition fails for the surviving predators".into())
        }
    }
}

/// Log death-rate traits, decreasing. The condition
/// `delta_N (beta + N) - sum_j delta_j < r` is tracked with a running sum.
struct DpepCommunity {
    xs: Vec<f64>,
    delta_sum: f64,
    params: SystemParams,
    last_dropped: Option<f64>,
}

impl DpepCommunity {
    fn new(x0: f64, params: SystemParams) -> Self {
        Self {
            xs: vec![x0],
            delta_sum: (-x0).exp(),
            params,
            last_dropped: None,
        }
    }

    fn lhs(&self) -> f64 {
        let last = *self.xs.last().unwrap();
        (-last).exp() * (self.params.beta() + self.xs.len() as f64) - self.delta_sum
    }
}

impl Community for DpepCommunity {
    fn len(&self) -> usize {
        self.xs.len()
    }

    fn apply(&mut self, parent: usize, m: [f64; 2]) -> Result<usize, String> {
        let x = m[0];
        if (x - self.xs[parent]).abs() > 1.0 + SLACK {
            return Err("mutant outside the mutation kernel".into());
        }
        if ((-x).exp() - m[1]).abs() > SLACK * m[1] {
            return Err("death rate does not match its log trait".into());
        }
        let at = self.xs.partition_point(|&v| v > x);
        self.xs.insert(at, x);
        self.delta_sum += (-x).exp();
        self.last_dropped = None;
        while self.lhs() >= self.params.r() {
            let v = self.xs.pop().ok_or("every type was removed")?;
            self.delta_sum -= (-v).exp();
            self.last_dropped = Some(v);
        }
        Ok(self.xs.len())
    }

    fn holds(&self) -> Result<(), String> {
        if self.xs.len() <= 64 && !check_fixed_alpha(&self.xs, self.params) {
            return Err("coexistence condition fails for the surviving predators".into());
        }
        if self.lhs() >= self.params.r() {
            return Err("coexistence condition fails for the surviving predators".into());
        }
        if let Some(v) = self.last_dropped {
            let mut with = self.xs.clone();
            with.push(v);
            let lhs = (-v).exp() * (self.params.beta() + with.len() as f64) - self.delta_sum - (-v).exp();
            if lhs < self.params.r() {
                return Err("a removed type would have coexisted".into());
            }
        }
        Ok(())
    }
}

pub fn ensure_clean(report: &Report) -> Result<()> {
    if let Some(v) = &report.violation {
        bail!("violation at line {}: {}", v.line, v.reason);
    }
    Ok(())
}
