//! Stage execution and the run manifest.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use effparam::analysis::{dependence_score, level_set_spread};
use effparam::dmaps::{diffusion_map_with_rule, select_independent_coordinates, DiffusionSpectrum};
use effparam::figures::{run_figure, FigureId};
use effparam::io::{write_dataset_csv, write_spectrum, Table};
use effparam::pellet::{log_grid, trace_curve};
use effparam::sampling::{filter_good, generate_dataset, Dataset, GoodSetSpec};
use effparam::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AnalysisStep, ExperimentConfig, PelletConfig, Series, Source, Stage};

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub rows: usize,
    pub failures: usize,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub version: &'static str,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub status: &'static str,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Collects stage outcomes and always writes `manifest.json`.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(command: &str, config: &ExperimentConfig, dir: &Path) -> Result<Self, Error> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                config_hash: config.hash(),
                version: env!("CARGO_PKG_VERSION"),
                started_unix: now(),
                finished_unix: 0.0,
                status: "running",
                stages: Vec::new(),
                artifacts: Vec::new(),
                config: config.clone(),
            },
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    /// Runs one stage; on error the failure is recorded and returned.
    fn stage<T>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Self) -> Result<(T, usize, usize), Error>,
    ) -> Result<T, Error> {
        match f(self) {
            Ok((v, rows, failures)) => {
                self.manifest.stages.push(StageRecord { name: name.into(), rows, failures, ok: true, error: None });
                Ok(v)
            }
            Err(e) => {
                self.manifest.stages.push(StageRecord {
                    name: name.into(),
                    rows: 0,
                    failures: 0,
                    ok: false,
                    error: Some(e.to_string()),
                });
                Err(e)
            }
        }
    }

    pub fn finish(mut self, ok: bool) -> Result<(), Error> {
        self.manifest.finished_unix = now();
        self.manifest.status = if ok { "ok" } else { "failed" };
        serde_json::to_writer_pretty(File::create(self.dir.join("manifest.json"))?, &self.manifest)?;
        Ok(())
    }
}

fn column(ds: &Dataset, s: &Series) -> Result<Vec<f64>, Error> {
    let m = match s.source {
        Source::Input => &ds.inputs,
        Source::Output => &ds.outputs,
    };
    let v = m.column(s.index - 1);
    if !s.log10 {
        return Ok(v);
    }
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Domain(format!("log10 of non-positive values in {:?} column {}", s.source, s.index)));
    }
    Ok(v.iter().map(|x| x.log10()).collect())
}

fn verdict(step: &AnalysisStep, ds: &Dataset, sp: &DiffusionSpectrum) -> Result<Value, Error> {
    Ok(match step {
        AnalysisStep::Dependence { coordinate, against, method } => {
            let d = dependence_score(&column(ds, against)?, &sp.psi(*coordinate), *method)?;
            json!({ "kind": "dependence", "coordinate": coordinate, "against": against, "method": method, "score": d.score, "n": d.n })
        }
        AnalysisStep::LevelSpread { coordinate, level, bins } => {
            let l = level_set_spread(&column(ds, level)?, &sp.psi(*coordinate), *bins)?;
            json!({ "kind": "level-spread", "coordinate": coordinate, "level": level, "bins": bins,
                    "within": l.within, "across": l.across, "ratio": l.ratio })
        }
        AnalysisStep::Select { count, options } => {
            let s = select_independent_coordinates(sp, *count, options.unwrap_or_default())?;
            json!({ "kind": "select", "count": count, "indices": s.indices, "candidates": s.candidates,
                    "scores": s.scores, "complete": s.complete })
        }
    })
}

/// Runs the experiment pipeline up to `last`, writing artifacts as stages complete.
pub fn experiment(run: &mut Run, cfg: &ExperimentConfig, last: Stage) -> Result<(), Error> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let sampler = cfg.sampler_spec()?;
    let ds = run.stage("generate", |r| {
        let mut ds = generate_dataset(&model, &sampler)?;
        let failures = ds.manifest.failures;
        if let Some(g) = &cfg.good_set {
            let spec = GoodSetSpec::from_reference(&model, &g.reference, g.delta)?.with_cost(g.cost);
            ds = filter_good(&ds, &spec)?;
        }
        write_dataset_csv(&ds, File::create(r.path("dataset.csv"))?)?;
        let rows = ds.len();
        Ok((ds, rows, failures))
    })?;
    if last == Stage::Generate {
        return Ok(());
    }
    let kernel = cfg.kernel.as_ref().expect("validated");
    let sp = run.stage("embed", |r| {
        let sp = diffusion_map_with_rule(&ds.cloud()?, kernel.family, &kernel.scale, kernel.eigenpairs)?;
        write_spectrum(&sp, File::create(r.path("embedding.csv"))?, File::create(r.path("embedding.json"))?)?;
        let rows = sp.len();
        Ok((sp, rows, 0))
    })?;
    if last == Stage::Embed {
        return Ok(());
    }
    run.stage("analyze", |r| {
        let verdicts = cfg.analysis.iter().map(|s| verdict(s, &ds, &sp)).collect::<Result<Vec<_>, _>>()?;
        serde_json::to_writer_pretty(File::create(r.path("verdicts.json"))?, &verdicts)?;
        Ok(((), verdicts.len(), 0))
    })
}

pub fn pellet(run: &mut Run, p: &PelletConfig) -> Result<(), Error> {
    run.stage("pellet", |r| {
        let grid = log_grid(p.phi_min, p.phi_max, p.points)?;
        let curve = trace_curve(p.beta, p.gamma, &grid, &p.trace.unwrap_or_default())?;
        let pts = &curve.points;
        let t = Table::from_columns(vec![
            ("phi", pts.iter().map(|q| q.phi).collect()),
            ("eta", pts.iter().map(|q| q.eta).collect()),
            ("arclength", pts.iter().map(|q| q.arclength).collect()),
            ("u_center", pts.iter().map(|q| q.u_center).collect()),
        ])?;
        t.write_csv(File::create(r.path("pellet_curve.csv"))?)?;
        Ok(((), curve.len(), curve.gaps.len()))
    })
}

pub fn figure(run: &mut Run, id: FigureId, seed: u64) -> Result<(), Error> {
    run.stage(id.as_str(), |r| {
        let res = run_figure(id, seed)?;
        let written = res.write_to(&r.dir)?;
        let rows = res.tables.iter().map(|(_, t)| t.len()).sum();
        for p in &written {
            if let Some(name) = p.file_name() {
                r.manifest.artifacts.push(name.to_string_lossy().into_owned());
            }
        }
        Ok(((), rows, 0))
    })
}
