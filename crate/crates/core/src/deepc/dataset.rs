//! Recorded input/output sequences: CSV with columns `t,u...,y...` and an
//! optional JSON sidecar describing how they were generated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::deepc::data::{partition, persistency_report, DataBlocks, DataMatrixKind, PersistencyReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Sample spacing (s).
    pub dt: f64,
    pub seed: u64,
    /// The configuration that produced the data.
    #[serde(default)]
    pub source: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub t: Vec<f64>,
    /// `T x m`, one sample per row.
    pub u: DMatrix<f64>,
    /// `T x p`.
    pub y: DMatrix<f64>,
    pub meta: DatasetMeta,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in self.meta.inputs.iter().chain(&self.meta.outputs) {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.t[k]);
            for v in self.u.row(k).iter().chain(self.y.row(k).iter()) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV and its JSON sidecar next to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(io_err(path))?;
        let side = sidecar_path(path);
        let mut json = serde_json::to_string_pretty(&self.meta).map_err(|source| Error::Json {
            context: side.display().to_string(),
            source,
        })?;
        json.push('\n');
        std::fs::write(&side, json).map_err(io_err(&side))
    }

    /// Reads a CSV and its sidecar (which supplies the input/output split).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let side = sidecar_path(path);
        let meta_text = std::fs::read_to_string(&side).map_err(io_err(&side))?;
        let meta: DatasetMeta = serde_json::from_str(&meta_text).map_err(|source| Error::Json {
            context: side.display().to_string(),
            source,
        })?;
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_csv(&text, meta).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_csv(text: &str, meta: DatasetMeta) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Config("empty dataset".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let m = meta.inputs.len();
        let p = meta.outputs.len();
        let expected: Vec<&str> = std::iter::once("t")
            .chain(meta.inputs.iter().map(String::as_str))
            .chain(meta.outputs.iter().map(String::as_str))
            .collect();
        if cols != expected {
            return Err(Error::Config(format!(
                "header {:?} does not match the sidecar channels {:?}",
                cols, expected
            )));
        }
        let mut t = Vec::new();
        let mut vals = Vec::new();
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 1 + m + p {
                return Err(Error::Config(format!(
                    "line {}: expected {} fields, found {}",
                    no + 1,
                    1 + m + p,
                    fields.len()
                )));
            }
            let mut row = Vec::with_capacity(fields.len());
            for f in fields {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("line {}: `{f}` is not a number", no + 1)))?;
                if !v.is_finite() {
                    return Err(Error::Config(format!("line {}: non-finite value", no + 1)));
                }
                row.push(v);
            }
            t.push(row[0]);
            vals.push(row);
        }
        let n = t.len();
        let u = DMatrix::from_fn(n, m, |i, j| vals[i][1 + j]);
        let y = DMatrix::from_fn(n, p, |i, j| vals[i][1 + m + j]);
        Ok(Self { t, u, y, meta })
    }

    pub fn blocks(&self, t_ini: usize, n: usize, kind: DataMatrixKind, columns: Option<usize>) -> Result<DataBlocks> {
        partition(&self.u, &self.y, t_ini, n, kind, columns)
    }

    /// Rank report of `[U_p; U_f]` and of the full `[U; Y]` stack for the
    /// given depth.
    pub fn persistency(
        &self,
        t_ini: usize,
        n: usize,
        kind: DataMatrixKind,
        columns: Option<usize>,
    ) -> Result<(PersistencyReport, PersistencyReport)> {
        let b = self.blocks(t_ini, n, kind, columns)?;
        Ok((persistency_report(&b.input_matrix()), persistency_report(&b.stacked())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset {
            t: vec![0.0, 0.05, 0.1],
            u: DMatrix::from_column_slice(3, 1, &[0.1, -0.2, 1.0 / 3.0]),
            y: DMatrix::from_column_slice(3, 1, &[1e-9, 2.5, -7.0]),
            meta: DatasetMeta {
                inputs: vec!["delta_r".into()],
                outputs: vec!["psi".into()],
                dt: 0.05,
                seed: 4,
                source: serde_json::json!({"amplitude": 0.2}),
            },
        }
    }

    #[test]
    fn csv_round_trip() {
        let d = sample();
        let back = Dataset::from_csv(&d.to_csv(), d.meta.clone()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("heading.csv");
        let d = sample();
        d.save(&path).unwrap();
        assert_eq!(Dataset::load(&path).unwrap(), d);
    }

    #[test]
    fn bad_field_names_line() {
        let d = sample();
        let text = "t,delta_r,psi\n0,1,2\n0.05,x,3\n";
        match Dataset::from_csv(text, d.meta) {
            Err(Error::Config(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
