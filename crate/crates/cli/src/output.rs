//! CSV and JSON artifacts. Every CSV has a header row, UTF-8 and LF endings;
//! floats use the shortest round-trip representation, so identical runs give
//! identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ppevo_core::analysis::{SpacingProfile, TrajectorySample};
use ppevo_core::evolution::EventRecord;
use serde::{Deserialize, Serialize};

pub const EVENT_HEADER: [&str; 6] = [
    "event_index",
    "time",
    "parent_index",
    "mutant_field_1",
    "mutant_field_2",
    "survivors",
];

/// Directory receiving one experiment's files.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: PathBuf,
}

impl Sink {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn rows<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        write_rows(&path, header, rows)?;
        Ok(path)
    }

    /// Event log with the founder as row 0 (empty parent index).
    pub fn events(&self, name: &str, founder: [f64; 2], events: &[EventRecord]) -> Result<PathBuf> {
        let founder_row = vec![
            "0".to_string(),
            "0".to_string(),
            String::new(),
            num(founder[0]),
            num(founder[1]),
            "1".to_string(),
        ];
        let rest = events.iter().map(|e| {
            vec![
                e.index.to_string(),
                num(e.time),
                e.parent.to_string(),
                num(e.mutant[0]),
                num(e.mutant[1]),
                e.survivors.to_string(),
            ]
        });
        self.rows(name, &EVENT_HEADER, std::iter::once(founder_row).chain(rest))
    }

    pub fn trajectory(&self, name: &str, sample: &TrajectorySample) -> Result<PathBuf> {
        let rows = sample
            .times
            .iter()
            .zip(&sample.values)
            .map(|(&t, &v)| vec![num(t), num(v)]);
        self.rows(name, &["time", "value"], rows)
    }

    pub fn profile(&self, name: &str, profile: &SpacingProfile) -> Result<PathBuf> {
        let rows = profile
            .abscissae
            .iter()
            .zip(&profile.masses)
            .map(|(&x, &m)| vec![num(x), num(m)]);
        self.rows(name, &["abscissa", "mass"], rows)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| anyhow::anyhow!("flushing {}: {}", path.display(), e.error()))?
        .flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedId {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

/// Aggregate result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub n: usize,
    pub seeds: Vec<SeedId>,
    pub estimates: Vec<Estimate>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(experiment: &str, master: u64, replicates: usize) -> Self {
        Self {
            experiment: experiment.to_string(),
            n: replicates,
            seeds: (0..replicates as u64)
                .map(|stream| SeedId { seed: master, stream })
                .collect(),
            estimates: Vec::new(),
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, estimate: f64, stderr: Option<f64>, n: usize, target: Option<f64>) {
        self.estimates.push(Estimate {
            name: name.to_string(),
            estimate,
            stderr,
            n,
            target,
        });
    }

    pub fn file(&mut self, path: &Path) {
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        self.files.push(name);
    }

    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    /// Human-readable lines.
    pub fn render(&self) -> String {
        let mut s = format!("{} ({} replicates)\n", self.experiment, self.n);
        for e in &self.estimates {
            s.push_str(&format!("  {:<32} {:>14}", e.name, short(e.estimate)));
            if let Some(se) = e.stderr {
                s.push_str(&format!("  +- {}", short(se)));
            }
            if let Some(t) = e.target {
                s.push_str(&format!("  (reference {})", short(t)));
            }
            s.push('\n');
        }
        for w in &self.warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
        s
    }
}

fn short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, None);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}
