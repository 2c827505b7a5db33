//! Model zoo: closed-form and integrated input → output maps.
//!
//! Every model is addressable by a string id through [`ModelSpec`], which
//! carries its observation protocol and builds a [`Model`].

pub mod abc;
pub mod henon;
pub mod ivp;
pub mod mmh;
pub mod regpert;
pub mod singpert;
pub mod toy;

use serde::{Deserialize, Serialize};

pub use abc::{abc_effective, Abc, AbcEffective};
pub use henon::{henon_forward, henon_inverse, Henon};
pub use ivp::{integrate_ivp, integrate_to_times, integrate_with_event, IvpOptions, Method, OdeSystem, Trajectory};
pub use mmh::{mmh_parameter_maps, mmh_reduced_response, Mmh, MmhInput, MmhParameters};
pub use regpert::Regpert;
pub use singpert::Singpert;
pub use toy::Toy;

use crate::error::{config, domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    Toy,
    Singpert,
    Regpert,
    Abc,
    Mmh,
    Henon,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Toy => "toy",
            Self::Singpert => "singpert",
            Self::Regpert => "regpert",
            Self::Abc => "abc",
            Self::Mmh => "mmh",
            Self::Henon => "henon",
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "toy" => Self::Toy,
            "singpert" => Self::Singpert,
            "regpert" => Self::Regpert,
            "abc" => Self::Abc,
            "mmh" => Self::Mmh,
            "henon" => Self::Henon,
            _ => return config(format!("unknown model id '{s}'")),
        })
    }
}

/// Monitored variable and times defining `f(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationProtocol {
    pub variable: String,
    pub times: Vec<f64>,
}

impl ObservationProtocol {
    pub fn new(variable: impl Into<String>, times: Vec<f64>) -> Result<Self> {
        let p = Self { variable: variable.into(), times };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return config("observation protocol needs at least one time");
        }
        if self.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return config("monitoring times must be positive");
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return config("monitoring times must be strictly increasing");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Analytic,
    Ivp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRange {
    pub name: String,
    /// Open lower bound (`-inf` when unbounded).
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDefinition {
    pub id: ModelId,
    pub inputs: Vec<InputRange>,
    pub solver: SolverKind,
    pub protocol: ObservationProtocol,
}

fn range(name: &str, lo: f64, hi: f64) -> InputRange {
    InputRange { name: name.into(), lo, hi }
}

/// Configuration-level description of a model and its protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Toy {
        #[serde(default)]
        perturbation: f64,
    },
    Singpert {
        #[serde(default = "default_singpert_x0")]
        x0: f64,
        #[serde(default = "default_three_times")]
        times: Vec<f64>,
    },
    Regpert {
        #[serde(default = "default_regpert_times")]
        times: Vec<f64>,
    },
    Abc {
        /// Monitoring times; resolved from `reference` when absent.
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default = "default_abc_reference")]
        reference: [f64; 3],
    },
    Mmh {
        #[serde(default = "default_three_times")]
        times: Vec<f64>,
        #[serde(default = "default_rtol")]
        rtol: f64,
        #[serde(default = "default_atol")]
        atol: f64,
    },
    Henon {
        #[serde(default = "default_henon_eps")]
        eps: f64,
        #[serde(default = "default_henon_b")]
        b: f64,
        #[serde(default = "default_henon_times")]
        times: Vec<f64>,
    },
}

fn default_singpert_x0() -> f64 {
    -1.0
}
fn default_three_times() -> Vec<f64> {
    vec![0.5, 1.0, 1.5]
}
fn default_regpert_times() -> Vec<f64> {
    vec![0.25, 1.0, 1.75]
}
fn default_abc_reference() -> [f64; 3] {
    [0.1, 1e3, 1e3]
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_henon_eps() -> f64 {
    1e-3
}
fn default_henon_b() -> f64 {
    1e-2
}
fn default_henon_times() -> Vec<f64> {
    Henon::default().times
}

impl ModelSpec {
    pub fn default_for(id: ModelId) -> Self {
        match id {
            ModelId::Toy => Self::Toy { perturbation: 0.0 },
            ModelId::Singpert => Self::Singpert { x0: -1.0, times: default_three_times() },
            ModelId::Regpert => Self::Regpert { times: default_regpert_times() },
            ModelId::Abc => Self::Abc { times: None, reference: default_abc_reference() },
            ModelId::Mmh => Self::Mmh { times: default_three_times(), rtol: 1e-8, atol: 1e-10 },
            ModelId::Henon => Self::Henon { eps: 1e-3, b: 1e-2, times: default_henon_times() },
        }
    }

    pub fn id(&self) -> ModelId {
        match self {
            Self::Toy { .. } => ModelId::Toy,
            Self::Singpert { .. } => ModelId::Singpert,
            Self::Regpert { .. } => ModelId::Regpert,
            Self::Abc { .. } => ModelId::Abc,
            Self::Mmh { .. } => ModelId::Mmh,
            Self::Henon { .. } => ModelId::Henon,
        }
    }

    pub fn build(&self) -> Result<Model> {
        let m = match self {
            Self::Toy { perturbation } => Model::Toy(Toy { perturbation: *perturbation }),
            Self::Singpert { x0, times } => Model::Singpert(Singpert { x0: *x0, times: times.clone() }),
            Self::Regpert { times } => Model::Regpert(Regpert { times: times.clone() }),
            Self::Abc { times, reference } => Model::Abc(match times {
                Some(t) => Abc { times: t.clone() },
                None => Abc::for_reference(*reference)?,
            }),
            Self::Mmh { times, rtol, atol } => {
                if !(*rtol > 0.0 && *atol > 0.0) {
                    return config("integrator tolerances must be positive");
                }
                Model::Mmh(Mmh { times: times.clone(), rtol: *rtol, atol: *atol })
            }
            Self::Henon { eps, b, times } => {
                if !(*eps > 0.0) {
                    return config("Hénon model ε must be positive");
                }
                Model::Henon(Henon { eps: *eps, b: *b, times: times.clone(), ..Henon::default() })
            }
        };
        m.protocol().validate()?;
        Ok(m)
    }
}

/// A ready-to-evaluate model.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Toy(Toy),
    Singpert(Singpert),
    Regpert(Regpert),
    Abc(Abc),
    Mmh(Mmh),
    Henon(Henon),
}

impl Model {
    pub fn id(&self) -> ModelId {
        match self {
            Self::Toy(_) => ModelId::Toy,
            Self::Singpert(_) => ModelId::Singpert,
            Self::Regpert(_) => ModelId::Regpert,
            Self::Abc(_) => ModelId::Abc,
            Self::Mmh(_) => ModelId::Mmh,
            Self::Henon(_) => ModelId::Henon,
        }
    }

    pub fn protocol(&self) -> ObservationProtocol {
        let (variable, times) = match self {
            // The toy model is static; its three "times" index the output components.
            Self::Toy(_) => ("f", vec![1.0, 2.0, 3.0]),
            Self::Singpert(m) => ("y", m.times.clone()),
            Self::Regpert(m) => ("x", m.times.clone()),
            Self::Abc(m) => ("C", m.times.clone()),
            Self::Mmh(m) => ("c", m.times.clone()),
            Self::Henon(m) => ("(x,y)", m.times.clone()),
        };
        ObservationProtocol { variable: variable.into(), times }
    }

    pub fn definition(&self) -> ModelDefinition {
        let inf = f64::INFINITY;
        let (inputs, solver) = match self {
            Self::Toy(_) => (vec![range("p1", 0.0, inf), range("p2", 0.0, inf)], SolverKind::Analytic),
            Self::Singpert(_) => (vec![range("eps", 0.0, inf), range("y0", -inf, inf)], SolverKind::Analytic),
            Self::Regpert(_) => (vec![range("eps", 0.0, inf), range("x0", 0.0, inf)], SolverKind::Analytic),
            Self::Abc(_) => {
                (vec![range("k1", 0.0, inf), range("k_1", 0.0, inf), range("k2", 0.0, inf)], SolverKind::Analytic)
            }
            Self::Mmh(_) => {
                (vec![range("eps", 0.0, inf), range("sigma", 0.0, inf), range("kappa", 0.0, inf)], SolverKind::Ivp)
            }
            Self::Henon(_) => (vec![range("u2", -inf, inf), range("w2", -inf, inf)], SolverKind::Analytic),
        };
        ModelDefinition { id: self.id(), inputs, solver, protocol: self.protocol() }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Abc(_) | Self::Mmh(_) => 3,
            _ => 2,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Self::Toy(_) => 3,
            Self::Henon(m) => 2 * m.times.len(),
            _ => self.protocol().times.len(),
        }
    }

    /// `f(p)`.
    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.input_dim() {
            return config(format!("{} expects {} inputs, got {}", self.id().as_str(), self.input_dim(), p.len()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return domain("non-finite model input");
        }
        let out = match self {
            Self::Toy(m) => m.outputs(p[0], p[1]),
            Self::Singpert(m) => m.outputs(p[0], p[1]),
            Self::Regpert(m) => m.outputs(p[0], p[1]),
            Self::Abc(m) => m.outputs(p[0], p[1], p[2]),
            Self::Mmh(m) => m.outputs(p[0], p[1], p[2]),
            Self::Henon(m) => m.outputs(p[0], p[1]),
        }?;
        if out.iter().any(|v| !v.is_finite()) {
            return domain(format!("non-finite output at {p:?}"));
        }
        Ok(out)
    }
}
