use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arrangement of a recorded sequence into data-matrix columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataMatrixKind {
    /// Overlapping windows, one column per shift.
    Hankel,
    /// Disjoint windows.
    #[default]
    Page,
}

/// Block Hankel matrix of a `T x d` sequence (one sample per row) with `r`
/// block rows; column `j` stacks samples `j .. j + r - 1`.
pub fn build_hankel(seq: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let (t, d) = seq.shape();
    if r == 0 || t < r {
        return Err(Error::InsufficientData {
            required: r.max(1),
            available: t,
        });
    }
    let cols = t - r + 1;
    Ok(DMatrix::from_fn(r * d, cols, |i, j| seq[(j + i / d, i % d)]))
}

/// Page matrix with `r` block rows; column `j` stacks samples
/// `j r .. (j + 1) r - 1`, a trailing remainder is dropped.
pub fn build_page(seq: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let (t, d) = seq.shape();
    if r == 0 || t < r {
        return Err(Error::InsufficientData {
            required: r.max(1),
            available: t,
        });
    }
    let cols = t / r;
    Ok(DMatrix::from_fn(r * d, cols, |i, j| seq[(j * r + i / d, i % d)]))
}

pub fn build_data_matrix(seq: &DMatrix<f64>, r: usize, kind: DataMatrixKind) -> Result<DMatrix<f64>> {
    match kind {
        DataMatrixKind::Hankel => build_hankel(seq, r),
        DataMatrixKind::Page => build_page(seq, r),
    }
}

/// Samples needed for `columns` columns of depth `depth`.
pub fn required_samples(depth: usize, columns: usize, kind: DataMatrixKind) -> usize {
    match kind {
        DataMatrixKind::Hankel => depth + columns - 1,
        DataMatrixKind::Page => depth * columns,
    }
}

/// Past/future partition of the input and output data matrices.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct DataBlocks {
    pub U_p: DMatrix<f64>,
    pub Y_p: DMatrix<f64>,
    pub U_f: DMatrix<f64>,
    pub Y_f: DMatrix<f64>,
    pub t_ini: usize,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub kind: DataMatrixKind,
}

impl DataBlocks {
    pub fn columns(&self) -> usize {
        self.U_p.ncols()
    }

    /// `[U_p; U_f]`.
    pub fn input_matrix(&self) -> DMatrix<f64> {
        stack(&self.U_p, &self.U_f)
    }

    /// `[U_p; U_f; Y_p; Y_f]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        stack(&self.input_matrix(), &stack(&self.Y_p, &self.Y_f))
    }

    /// Shifts the outputs of every column so that its last past sample is
    /// zero. For outputs whose dynamics do not depend on their absolute
    /// value (heading, depth) this removes the offsets between columns; the
    /// online windows must then be shifted the same way.
    pub fn anchored(&self) -> DataBlocks {
        let mut out = self.clone();
        let last = (self.t_ini - 1) * self.p;
        for j in 0..self.columns() {
            for ch in 0..self.p {
                let a = self.Y_p[(last + ch, j)];
                for k in 0..self.t_ini {
                    out.Y_p[(k * self.p + ch, j)] -= a;
                }
                for k in 0..self.n {
                    out.Y_f[(k * self.p + ch, j)] -= a;
                }
            }
        }
        out
    }
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Keeps `c` columns spread evenly over the available ones (all when
/// `c >= available`).
pub fn select_columns(mat: &DMatrix<f64>, c: usize) -> DMatrix<f64> {
    let total = mat.ncols();
    if c == 0 || c >= total {
        return mat.clone();
    }
    let idx: Vec<usize> = (0..c).map(|k| k * total / c).collect();
    mat.select_columns(idx.iter())
}

/// Builds the data matrices of depth `t_ini + n` from aligned input and
/// output sequences (`T x m` and `T x p`) and splits them into past and
/// future blocks. `columns` caps the column count (`None` keeps all).
pub fn partition(
    u_data: &DMatrix<f64>,
    y_data: &DMatrix<f64>,
    t_ini: usize,
    n: usize,
    kind: DataMatrixKind,
    columns: Option<usize>,
) -> Result<DataBlocks> {
    if t_ini == 0 || n == 0 {
        return Err(Error::Config("T_ini and T_fut must be at least 1".into()));
    }
    if u_data.nrows() != y_data.nrows() {
        return Err(Error::Dimension(format!(
            "input has {} samples, output has {}",
            u_data.nrows(),
            y_data.nrows()
        )));
    }
    let depth = t_ini + n;
    let want = columns.unwrap_or(1).max(1);
    let required = required_samples(depth, want, kind);
    if u_data.nrows() < required {
        return Err(Error::InsufficientData {
            required,
            available: u_data.nrows(),
        });
    }
    let (m, p) = (u_data.ncols(), y_data.ncols());
    let mut hu = build_data_matrix(u_data, depth, kind)?;
    let mut hy = build_data_matrix(y_data, depth, kind)?;
    if let Some(c) = columns {
        hu = select_columns(&hu, c);
        hy = select_columns(&hy, c);
    }
    Ok(DataBlocks {
        U_p: hu.rows(0, t_ini * m).into_owned(),
        U_f: hu.rows(t_ini * m, n * m).into_owned(),
        Y_p: hy.rows(0, t_ini * p).into_owned(),
        Y_f: hy.rows(t_ini * p, n * p).into_owned(),
        t_ini,
        n,
        m,
        p,
        kind,
    })
}

/// Rank diagnostics of a data matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencyReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub full_row_rank: bool,
}

/// Numerical rank from the SVD with the usual `max(r, c) eps sigma_max`
/// threshold; `sigma_min` is the smallest of the `min(rows, cols)` singular
/// values (zero when there are fewer columns than rows).
pub fn persistency_report(mat: &DMatrix<f64>) -> PersistencyReport {
    let (rows, cols) = mat.shape();
    if rows == 0 || cols == 0 {
        return PersistencyReport {
            rows,
            cols,
            rank: 0,
            sigma_max: 0.0,
            sigma_min: 0.0,
            full_row_rank: rows == 0,
        };
    }
    let sv = mat.singular_values();
    let sigma_max = sv.max();
    let tol = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let sigma_min = if cols < rows { 0.0 } else { sv.min() };
    PersistencyReport {
        rows,
        cols,
        rank,
        sigma_max,
        sigma_min,
        full_row_rank: rank == rows,
    }
}
