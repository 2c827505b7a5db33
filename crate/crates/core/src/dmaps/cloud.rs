use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::linalg::Matrix;

/// Paired input/output samples `{(p⁽ˡ⁾, f(p⁽ˡ⁾))}`.
///
/// Inputs are an `L × M` matrix, outputs (optional) an `L × N` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    ids: Vec<u64>,
    inputs: Matrix,
    outputs: Option<Matrix>,
}

impl PointCloud {
    pub fn new(ids: Vec<u64>, inputs: Matrix, outputs: Option<Matrix>) -> Result<Self> {
        let l = inputs.nrows();
        if l < 2 {
            return config(format!("a point cloud needs at least 2 points, got {l}"));
        }
        if ids.len() != l {
            return config(format!("{} ids for {l} points", ids.len()));
        }
        if inputs.as_slice().iter().any(|v| !v.is_finite()) {
            return config("non-finite entry in input block");
        }
        if let Some(out) = &outputs {
            if out.nrows() != l {
                return config(format!("{} output rows for {l} input rows", out.nrows()));
            }
            if out.as_slice().iter().any(|v| !v.is_finite()) {
                return config("non-finite entry in output block");
            }
        }
        Ok(Self { ids, inputs, outputs })
    }

    /// Cloud with sequential ids `0..L`.
    pub fn from_parts(inputs: Matrix, outputs: Option<Matrix>) -> Result<Self> {
        let ids = (0..inputs.nrows() as u64).collect();
        Self::new(ids, inputs, outputs)
    }

    pub fn from_inputs(inputs: Matrix) -> Result<Self> {
        Self::from_parts(inputs, None)
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn outputs(&self) -> Option<&Matrix> {
        self.outputs.as_ref()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.outputs.as_ref().map(Matrix::ncols)
    }

    /// Subset (or reordering) of points by position.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(
            idx.iter().map(|&i| self.ids[i]).collect(),
            self.inputs.select_rows(idx),
            self.outputs.as_ref().map(|o| o.select_rows(idx)),
        )
    }

    /// Same cloud with the input block replaced (outputs untouched).
    pub fn with_inputs(&self, inputs: Matrix) -> Result<Self> {
        Self::new(self.ids.clone(), inputs, self.outputs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_clouds() {
        let one = Matrix::from_rows(&[[1.0]]).unwrap();
        assert!(PointCloud::from_inputs(one).is_err());
        let nan = Matrix::from_rows(&[[1.0], [f64::NAN]]).unwrap();
        assert!(PointCloud::from_inputs(nan).is_err());
        let two = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let bad_out = Matrix::from_rows(&[[1.0]]).unwrap();
        assert!(PointCloud::from_parts(two, Some(bad_out)).is_err());
    }
}
