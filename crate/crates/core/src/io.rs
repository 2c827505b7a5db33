//! CSV and JSON artifacts: plot tables, datasets and spectra.
//!
//! Floats are written in shortest round-trip decimal form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dmaps::{DiffusionSpectrum, KernelSpec};
use crate::error::{config, Result};
use crate::linalg::Matrix;
use crate::sampling::{Dataset, DatasetManifest};

/// Named numeric columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Builds a table from equal-length columns.
    pub fn from_columns<S: Into<String>>(cols: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.1.len());
        if cols.iter().any(|c| c.1.len() != n) {
            return config("table columns have different lengths");
        }
        let mut t = Table::new(Vec::<String>::new());
        let data: Vec<Vec<f64>> = cols
            .into_iter()
            .map(|(name, v)| {
                t.columns.push(name.into());
                v
            })
            .collect();
        t.rows = (0..n).map(|i| data.iter().map(|c| c[i]).collect()).collect();
        Ok(t)
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return config(format!("row has {} values for {} columns", row.len(), self.columns.len()));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for r in &self.rows {
            wr.write_record(r.iter().map(|v| format_float(*v)))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let columns: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| crate::Error::Config(format!("bad number '{s}': {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return config("ragged CSV row");
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

fn numbered(prefix: &str, n: usize, start: usize) -> Vec<String> {
    (start..start + n).map(|i| format!("{prefix}_{i}")).collect()
}

/// Dataset CSV: `id,p_1..p_M,f_1..f_N`.
pub fn write_dataset_csv(d: &Dataset, w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string()];
    header.extend(numbered("p", d.inputs.ncols(), 1));
    header.extend(numbered("f", d.outputs.ncols(), 1));
    wr.write_record(&header)?;
    for (i, id) in d.ids.iter().enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend(d.inputs.row(i).iter().chain(d.outputs.row(i)).map(|v| format_float(*v)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a dataset CSV; the manifest must be supplied separately.
pub fn read_dataset_csv(r: impl Read, manifest: DatasetManifest) -> Result<Dataset> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("id") {
        return config("dataset CSV must start with an 'id' column");
    }
    let m = header.iter().filter(|h| h.starts_with("p_")).count();
    let n = header.iter().filter(|h| h.starts_with("f_")).count();
    if header.len() != 1 + m + n || header[1..] != [numbered("p", m, 1), numbered("f", n, 1)].concat()[..] {
        return config("dataset CSV header must be id,p_1..p_M,f_1..f_N");
    }
    let (mut ids, mut inputs, mut outputs) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        ids.push(rec[0].parse::<u64>().map_err(|e| crate::Error::Config(format!("bad id: {e}")))?);
        for (k, s) in rec.iter().enumerate().skip(1) {
            let v: f64 = s.parse().map_err(|e| crate::Error::Config(format!("bad number '{s}': {e}")))?;
            if k <= m {
                inputs.push(v);
            } else {
                outputs.push(v);
            }
        }
    }
    let l = ids.len();
    Ok(Dataset { ids, inputs: Matrix::from_vec(l, m, inputs)?, outputs: Matrix::from_vec(l, n, outputs)?, manifest })
}

/// Sidecar metadata of a spectrum CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub eigenvalues: Vec<f64>,
    pub kernel: KernelSpec,
    pub points: usize,
}

/// Spectrum CSV `id,psi_0,...,psi_k` plus its JSON sidecar.
pub fn write_spectrum(s: &DiffusionSpectrum, csv_out: impl Write, json_out: impl Write) -> Result<()> {
    let k = s.eigenvalues.len();
    let mut wr = csv::Writer::from_writer(csv_out);
    let mut header = vec!["id".to_string()];
    header.extend(numbered("psi", k, 0));
    wr.write_record(&header)?;
    for (i, id) in s.cloud.ids().iter().enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend((0..k).map(|j| format_float(s.eigenvectors[(i, j)])));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    let meta = SpectrumMeta { eigenvalues: s.eigenvalues.clone(), kernel: s.kernel, points: s.len() };
    serde_json::to_writer_pretty(json_out, &meta)?;
    Ok(())
}
