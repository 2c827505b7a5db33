use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{config, Result};
use crate::linalg::{sq_dist, Matrix};

/// Which dissimilarity feeds the diffusion kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelFamily {
    InputOnly,
    OutputOnly,
    /// `exp(-|Δp|²/s - |Δf|²/s^(a/2))`.
    Mixed {
        exponent: f64,
    },
    /// Output-only kernel on delay-paired outputs `(f(pᵢ), f(pᵢ + Δ))`.
    /// The cloud's output block must already hold the pairs; `offset` is
    /// kept for provenance.
    AugmentedOutput {
        offset: f64,
    },
}

/// How a bandwidth ε converts into the full denominator `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleConvention {
    /// `s = ε`.
    Full,
    /// `exp(-d²/(2ε))`, so `s = 2ε`.
    Doubled,
    /// `exp(-d²/ε²)`, so `s = ε²`.
    Squared,
}

impl ScaleConvention {
    pub fn denominator(self, eps: f64) -> f64 {
        match self {
            Self::Full => eps,
            Self::Doubled => 2.0 * eps,
            Self::Squared => eps * eps,
        }
    }
}

/// Kernel family plus the full denominator `s` applied to squared distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    pub scale: f64,
}

impl KernelSpec {
    pub fn input_only(scale: f64) -> Self {
        Self { family: KernelFamily::InputOnly, scale }
    }

    pub fn output_only(scale: f64) -> Self {
        Self { family: KernelFamily::OutputOnly, scale }
    }

    pub fn mixed(scale: f64, exponent: f64) -> Self {
        Self { family: KernelFamily::Mixed { exponent }, scale }
    }

    pub fn augmented_output(scale: f64, offset: f64) -> Self {
        Self { family: KernelFamily::AugmentedOutput { offset }, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return config(format!("kernel scale must be positive and finite, got {}", self.scale));
        }
        match self.family {
            KernelFamily::Mixed { exponent } if !(exponent > 0.0 && exponent.is_finite()) => {
                config(format!("mixed-kernel exponent must be positive, got {exponent}"))
            }
            KernelFamily::AugmentedOutput { offset } if !(offset > 0.0 && offset.is_finite()) => {
                config(format!("augmented-output offset must be positive, got {offset}"))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_outputs(&self) -> bool {
        !matches!(self.family, KernelFamily::InputOnly)
    }

    /// Denominator applied to the output channel of a mixed kernel.
    pub fn output_denominator(&self) -> f64 {
        match self.family {
            KernelFamily::Mixed { exponent } => self.scale.powf(exponent / 2.0),
            _ => self.scale,
        }
    }

    /// Kernel value from squared input and output distances.
    /// Only the channel(s) used by the family are read.
    pub fn evaluate(&self, dp2: f64, df2: f64) -> f64 {
        match self.family {
            KernelFamily::InputOnly => (-dp2 / self.scale).exp(),
            KernelFamily::OutputOnly | KernelFamily::AugmentedOutput { .. } => (-df2 / self.scale).exp(),
            KernelFamily::Mixed { .. } => (-dp2 / self.scale - df2 / self.output_denominator()).exp(),
        }
    }
}

/// Squared pairwise distances for the channels a kernel uses.
#[derive(Clone, Debug)]
pub struct Dissimilarity {
    /// `|pᵢ - pⱼ|²`, present for input-only and mixed families.
    pub input: Option<Matrix>,
    /// `|fᵢ - fⱼ|²`, present for output-informed families.
    pub output: Option<Matrix>,
}

fn squared_distances(x: &Matrix) -> Matrix {
    let n = x.nrows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = sq_dist(x.row(i), x.row(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

pub fn pairwise_dissimilarity(cloud: &PointCloud, spec: &KernelSpec) -> Result<Dissimilarity> {
    spec.validate()?;
    let outputs = if spec.needs_outputs() {
        match cloud.outputs() {
            Some(o) => Some(squared_distances(o)),
            None => return config("output-informed kernel requested but the cloud has no output block"),
        }
    } else {
        None
    };
    let input = match spec.family {
        KernelFamily::InputOnly | KernelFamily::Mixed { .. } => Some(squared_distances(cloud.inputs())),
        _ => None,
    };
    Ok(Dissimilarity { input, output: outputs })
}

/// Kernel matrix `A` and its row sums `q`.
#[derive(Clone, Debug)]
pub struct AffinityMatrix {
    pub a: Matrix,
    pub q: Vec<f64>,
}

pub fn build_affinity(d: &Dissimilarity, spec: &KernelSpec) -> Result<AffinityMatrix> {
    spec.validate()?;
    let n = d
        .input
        .as_ref()
        .or(d.output.as_ref())
        .map(Matrix::nrows)
        .ok_or_else(|| crate::Error::Config("empty dissimilarity".into()))?;
    let channel = |m: &Option<Matrix>, name: &str| -> Result<Matrix> {
        m.clone().ok_or_else(|| crate::Error::Config(format!("kernel needs the {name} distance channel")))
    };
    let a = match spec.family {
        KernelFamily::InputOnly => {
            let dp = channel(&d.input, "input")?;
            Matrix::from_fn(n, n, |i, j| spec.evaluate(dp[(i, j)], 0.0))
        }
        KernelFamily::OutputOnly | KernelFamily::AugmentedOutput { .. } => {
            let df = channel(&d.output, "output")?;
            Matrix::from_fn(n, n, |i, j| spec.evaluate(0.0, df[(i, j)]))
        }
        KernelFamily::Mixed { .. } => {
            let dp = channel(&d.input, "input")?;
            let df = channel(&d.output, "output")?;
            Matrix::from_fn(n, n, |i, j| spec.evaluate(dp[(i, j)], df[(i, j)]))
        }
    };
    let q: Vec<f64> = a.rows().map(|r| r.iter().sum()).collect();
    Ok(AffinityMatrix { a, q })
}
