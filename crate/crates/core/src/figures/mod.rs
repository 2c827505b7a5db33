//! Figure-reproduction pipelines.
//!
//! Each pipeline runs one experiment end to end and returns the plot-data
//! tables needed to redraw its panels together with scalar metrics. The
//! metrics are raw measurements; deciding pass/fail is left to callers.

mod abc;
mod activesub;
mod henon;
mod mmh;
mod pellet;
mod perturbation;
mod rect;
mod toy;

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;

pub use abc::fig6;
pub use activesub::activesub;
pub use henon::henon;
pub use mmh::{boundary_study, mmh, polyline_distance, BoundaryStudy};
pub use pellet::{fig7, fig8};
pub use perturbation::{fig2_4, fig5, svals};
pub use rect::rect;
pub use toy::fig1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "fig1")]
    Fig1,
    #[serde(rename = "fig2-4")]
    Fig2To4,
    #[serde(rename = "fig5")]
    Fig5,
    #[serde(rename = "fig6")]
    Fig6,
    #[serde(rename = "mmh")]
    Mmh,
    #[serde(rename = "fig7")]
    Fig7,
    #[serde(rename = "fig8")]
    Fig8,
    #[serde(rename = "svals")]
    Svals,
    #[serde(rename = "rect")]
    Rect,
    #[serde(rename = "henon")]
    Henon,
    #[serde(rename = "activesub")]
    Activesub,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        Self::Fig1,
        Self::Fig2To4,
        Self::Fig5,
        Self::Fig6,
        Self::Mmh,
        Self::Fig7,
        Self::Fig8,
        Self::Svals,
        Self::Rect,
        Self::Henon,
        Self::Activesub,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2To4 => "fig2-4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Mmh => "mmh",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::Svals => "svals",
            Self::Rect => "rect",
            Self::Henon => "henon",
            Self::Activesub => "activesub",
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| crate::Error::Config(format!("unknown figure id '{s}'")))
    }
}

/// Plot tables and measurements of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureResult {
    pub id: FigureId,
    pub seed: u64,
    /// `(file stem, table)`.
    pub tables: Vec<(String, Table)>,
    pub metrics: BTreeMap<String, f64>,
}

impl FigureResult {
    fn new(id: FigureId, seed: u64) -> Self {
        Self { id, seed, tables: Vec::new(), metrics: BTreeMap::new() }
    }

    fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    /// A recorded metric; panics on unknown names, which are programming errors.
    pub fn get(&self, name: &str) -> f64 {
        match self.metrics.get(name) {
            Some(v) => *v,
            None => panic!("{} has no metric '{name}'", self.id),
        }
    }

    pub fn get_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Writes `<stem>.csv` for every table plus `metrics.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, t) in &self.tables {
            let path = dir.join(format!("{name}.csv"));
            t.write_csv(std::fs::File::create(&path)?)?;
            written.push(path);
        }
        let path = dir.join("metrics.json");
        serde_json::to_writer_pretty(
            std::fs::File::create(&path)?,
            &serde_json::json!({ "figure": self.id, "seed": self.seed, "metrics": self.metrics }),
        )?;
        written.push(path);
        Ok(written)
    }
}

pub fn run_figure(id: FigureId, seed: u64) -> Result<FigureResult> {
    match id {
        FigureId::Fig1 => fig1(seed),
        FigureId::Fig2To4 => fig2_4(seed),
        FigureId::Fig5 => fig5(seed),
        FigureId::Fig6 => fig6(seed),
        FigureId::Mmh => mmh(seed),
        FigureId::Fig7 => fig7(seed),
        FigureId::Fig8 => fig8(seed),
        FigureId::Svals => svals(seed),
        FigureId::Rect => rect(seed),
        FigureId::Henon => henon(seed),
        FigureId::Activesub => activesub(seed),
    }
}

fn bool_metric(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn columns(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j)).collect()
}

fn named(prefix: &str, cols: Vec<Vec<f64>>, start: usize) -> Vec<(String, Vec<f64>)> {
    cols.into_iter().enumerate().map(|(i, c)| (format!("{prefix}{}", i + start), c)).collect()
}
