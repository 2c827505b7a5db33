//! Experiment configuration: a versioned JSON document.

use std::path::{Path, PathBuf};

use effparam::analysis::DependenceMethod;
use effparam::dmaps::{KernelFamily, ScaleRule, SelectOptions};
use effparam::models::ModelSpec;
use effparam::pellet::TraceOptions;
use effparam::sampling::{CostKind, Dimension, SamplerSpec};
use effparam::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Which column of the dataset a verdict looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Input,
    Output,
}

/// A dataset column, 1-based, optionally in `log₁₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub source: Source,
    pub index: usize,
    #[serde(default)]
    pub log10: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisStep {
    /// How well diffusion coordinate `coordinate` is determined by `against`.
    Dependence {
        coordinate: usize,
        against: Series,
        #[serde(default = "default_method")]
        method: DependenceMethod,
    },
    /// Spread of a coordinate within level sets of a series.
    LevelSpread {
        coordinate: usize,
        level: Series,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    /// Number of independent diffusion coordinates.
    Select {
        count: usize,
        #[serde(default)]
        options: Option<SelectOptions>,
    },
}

fn default_method() -> DependenceMethod {
    DependenceMethod::Spearman
}

fn default_bins() -> usize {
    20
}

/// Optional good-set filter applied after generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodSetConfig {
    pub reference: Vec<f64>,
    pub delta: f64,
    #[serde(default)]
    pub cost: CostKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub dims: Vec<Dimension>,
    pub count: usize,
}

// `flatten` rules out `deny_unknown_fields` here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default)]
    pub scale: ScaleRule,
    #[serde(default = "default_eigenpairs")]
    pub eigenpairs: usize,
}

fn default_eigenpairs() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PelletConfig {
    pub beta: f64,
    pub gamma: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
    #[serde(default)]
    pub trace: Option<TraceOptions>,
}

impl Default for PelletConfig {
    fn default() -> Self {
        Self { beta: 0.2, gamma: 20.0, phi_min: 0.9, phi_max: 10.0, points: 1043, trace: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_set: Option<GoodSetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analysis: Vec<AnalysisStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pellet: Option<PelletConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// What a subcommand needs from the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Generate,
    Embed,
    Analyze,
}

impl ExperimentConfig {
    /// Minimal config for commands that can run without a file.
    pub fn bare(seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            model: None,
            sampler: None,
            good_set: None,
            kernel: None,
            analysis: Vec::new(),
            pellet: None,
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn sampler_spec(&self) -> Result<SamplerSpec, Error> {
        let s = self.sampler.as_ref().ok_or_else(|| Error::Config("config has no 'sampler' block".into()))?;
        let spec = SamplerSpec::new(s.dims.clone(), s.count, self.seed);
        spec.validate()?;
        Ok(spec)
    }

    /// Checks everything a run up to `stage` will touch, before any file is written.
    pub fn validate_for(&self, stage: Stage) -> Result<(), Error> {
        let model = self.model.as_ref().ok_or_else(|| Error::Config("config has no 'model' block".into()))?.build()?;
        let sampler = self.sampler_spec()?;
        if sampler.dims.len() != model.input_dim() {
            return Err(Error::Config(format!(
                "sampler has {} dimensions but model '{}' takes {} inputs",
                sampler.dims.len(),
                model.id().as_str(),
                model.input_dim()
            )));
        }
        if let Some(g) = &self.good_set {
            if g.reference.len() != model.input_dim() {
                return Err(Error::Config("good_set.reference length must match the model inputs".into()));
            }
            if !(g.delta > 0.0) {
                return Err(Error::Config(format!("good_set.delta must be positive, got {}", g.delta)));
            }
        }
        if stage >= Stage::Embed {
            let k = self.kernel.as_ref().ok_or_else(|| Error::Config("config has no 'kernel' block".into()))?;
            if k.eigenpairs == 0 {
                return Err(Error::Config("kernel.eigenpairs must be at least 1".into()));
            }
        }
        if stage >= Stage::Analyze {
            let k = self.kernel.as_ref().map_or(0, |k| k.eigenpairs);
            let check_series = |s: &Series| {
                let dim = match s.source {
                    Source::Input => model.input_dim(),
                    Source::Output => model.output_dim(),
                };
                if s.index == 0 || s.index > dim {
                    return Err(Error::Config(format!("series index {} outside 1..={dim}", s.index)));
                }
                Ok(())
            };
            let check_coord = |c: usize| {
                if c == 0 || c > k {
                    return Err(Error::Config(format!("coordinate {c} outside 1..={k}")));
                }
                Ok(())
            };
            for step in &self.analysis {
                match step {
                    AnalysisStep::Dependence { coordinate, against, .. } => {
                        check_coord(*coordinate)?;
                        check_series(against)?;
                    }
                    AnalysisStep::LevelSpread { coordinate, level, bins } => {
                        check_coord(*coordinate)?;
                        check_series(level)?;
                        if *bins < 2 {
                            return Err(Error::Config("level-spread needs at least 2 bins".into()));
                        }
                    }
                    AnalysisStep::Select { count, .. } => {
                        if *count == 0 {
                            return Err(Error::Config("select.count must be at least 1".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved config. The output
    /// directory is excluded so the hash does not depend on where a run lands.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&Self { out: None, ..self.clone() }).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{
        "schema_version": 1,
        "seed": 3,
        "model": { "id": "toy" },
        "sampler": { "dims": [ { "lo": 0.5, "hi": 2.0, "spacing": "uniform" },
                               { "lo": 0.5, "hi": 2.0, "spacing": "uniform" } ], "count": 50 },
        "kernel": { "family": "output-only", "eigenpairs": 4 },
        "analysis": [ { "kind": "select", "count": 2 } ]
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::parse(TOY).unwrap();
        assert_eq!(c.seed, 3);
        c.validate_for(Stage::Analyze).unwrap();
        assert_eq!(c.kernel.unwrap().scale, ScaleRule::default());
    }

    #[test]
    fn rejects_wrong_schema_and_unknown_fields() {
        assert!(ExperimentConfig::parse(&TOY.replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
        assert!(ExperimentConfig::parse(&TOY.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1")).is_err());
        assert!(ExperimentConfig::parse(&TOY.replace("\"toy\"", "\"tofu\"")).is_err());
    }

    #[test]
    fn catches_dimension_mismatch() {
        let c = ExperimentConfig::parse(&TOY.replace("\"count\": 50", "\"count\": 0")).unwrap();
        assert!(c.validate_for(Stage::Generate).is_err());
        let mut c = ExperimentConfig::parse(TOY).unwrap();
        c.sampler.as_mut().unwrap().dims.pop();
        assert!(c.validate_for(Stage::Generate).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::parse(TOY).unwrap();
        let b = ExperimentConfig::parse(&TOY.replace('\n', " ")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.out = Some("/elsewhere".into());
        assert_eq!(a.hash(), c.hash());
        c.seed = 4;
        assert_ne!(a.hash(), c.hash());
    }
}
