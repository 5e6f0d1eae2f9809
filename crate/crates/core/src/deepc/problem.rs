#![allow(non_snake_case)]

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::deepc::data::{DataBlocks, DataMatrixKind};
use crate::deepc::qp::{QpMethod, QpSettings, QpSolver, QpStatus};
use crate::error::{Error, Result};

/// Horizons, weights and bounds of one DeePC loop. `T_d` is the number of
/// data-matrix columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeePCConfig {
    pub T_fut: usize,
    pub T_ini: usize,
    pub T_d: usize,
    pub lambda_ini: f64,
    pub lambda_g: f64,
    pub Q: f64,
    pub R: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    /// Output channels the `y` bounds apply to; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constrained_outputs: Option<Vec<usize>>,
    #[serde(default)]
    pub kind: DataMatrixKind,
    /// Factor from the physical input to the units the weights refer to.
    #[serde(default = "one")]
    pub u_scale: f64,
    /// Same for the output.
    #[serde(default = "one")]
    pub y_scale: f64,
}

fn one() -> f64 {
    1.0
}

const DEG: f64 = std::f64::consts::PI / 180.0;
/// Radians to degrees, the unit the angle weights of the presets refer to.
pub const TO_DEG: f64 = 180.0 / std::f64::consts::PI;

impl DeePCConfig {
    /// Heading loop, rudder to yaw angle.
    pub fn heading() -> Self {
        Self {
            T_fut: 10,
            T_ini: 6,
            T_d: 100,
            lambda_ini: 1e7,
            lambda_g: 1e3,
            Q: 1e4,
            R: 0.1,
            u_min: Some(-20.0 * DEG),
            u_max: Some(20.0 * DEG),
            y_min: None,
            y_max: None,
            constrained_outputs: None,
            kind: DataMatrixKind::Page,
            u_scale: 1.0,
            y_scale: TO_DEG,
        }
    }

    /// Outer depth loop, pitch angle to depth.
    pub fn depth() -> Self {
        Self {
            T_fut: 7,
            T_ini: 7,
            T_d: 200,
            lambda_ini: 1e5,
            lambda_g: 1e2,
            Q: 1e2,
            R: 1e3,
            u_min: Some(-30.0 * DEG),
            u_max: Some(30.0 * DEG),
            y_min: None,
            y_max: None,
            constrained_outputs: None,
            kind: DataMatrixKind::Page,
            u_scale: 1.0,
            y_scale: 1.0,
        }
    }

    /// Inner pitch loop, stern plane to pitch angle.
    pub fn pitch() -> Self {
        Self {
            T_fut: 6,
            T_ini: 5,
            T_d: 100,
            lambda_ini: 1e7,
            lambda_g: 1e2,
            Q: 1e4,
            R: 500.0,
            u_min: Some(-20.0 * DEG),
            u_max: Some(20.0 * DEG),
            y_min: Some(-30.0 * DEG),
            y_max: Some(30.0 * DEG),
            constrained_outputs: None,
            kind: DataMatrixKind::Page,
            u_scale: 1.0,
            y_scale: TO_DEG,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.T_fut == 0 || self.T_ini == 0 || self.T_d == 0 {
            return Err(Error::Config("DeePC horizons and T_d must be at least 1".into()));
        }
        let pos = [
            ("lambda_ini", self.lambda_ini),
            ("lambda_g", self.lambda_g),
            ("Q", self.Q),
            ("R", self.R),
            ("u_scale", self.u_scale),
            ("y_scale", self.y_scale),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("DeePC weight {name} must be positive, got {v}")));
            }
        }
        for (lo, hi, what) in [(self.u_min, self.u_max, "u"), (self.y_min, self.y_max, "y")] {
            if let (Some(a), Some(b)) = (lo, hi) {
                if a > b {
                    return Err(Error::Config(format!("{what}_min exceeds {what}_max")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    pub status: QpStatus,
    pub method: QpMethod,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeePCSolution {
    pub u_opt: DVector<f64>,
    pub y_pred: DVector<f64>,
    pub g: DVector<f64>,
    pub sigma_y: DVector<f64>,
    pub objective: f64,
    pub stats: SolverStats,
}

/// The condensed DeePC problem in `g` for fixed data and weights.
/// Inputs and outputs are taken in physical units; the tracking, input and
/// past-output terms are weighted after scaling by `u_scale` and `y_scale`.
///
/// Cost `Q|r - Y_f g|^2 + R|U_f g|^2 + lambda_g |g|^2 +
/// lambda_ini |Y_p g - y_ini|^2` subject to `U_p g = u_ini` and the input and
/// output boxes on `U_f g` and `Y_f g`.
#[derive(Debug, Clone)]
pub struct DeepcProblem {
    blocks: DataBlocks,
    cfg: DeePCConfig,
    solver: QpSolver,
    /// Output rows of `Y_f` with bounds.
    y_rows: Vec<usize>,
    has_u_box: bool,
}

impl DeepcProblem {
    pub fn new(blocks: DataBlocks, cfg: DeePCConfig, settings: QpSettings) -> Result<Self> {
        cfg.validate()?;
        if blocks.t_ini != cfg.T_ini || blocks.n != cfg.T_fut {
            return Err(Error::Dimension(format!(
                "data blocks are built for T_ini = {}, N = {} but the config asks for {} and {}",
                blocks.t_ini, blocks.n, cfg.T_ini, cfg.T_fut
            )));
        }
        let c = blocks.columns();
        let (up, yp, uf, yf) = (&blocks.U_p, &blocks.Y_p, &blocks.U_f, &blocks.Y_f);
        let (su2, sy2) = (cfg.u_scale.powi(2), cfg.y_scale.powi(2));
        let mut p = yf.transpose() * yf * (cfg.Q * sy2)
            + uf.transpose() * uf * (cfg.R * su2)
            + yp.transpose() * yp * (cfg.lambda_ini * sy2);
        for i in 0..c {
            p[(i, i)] += cfg.lambda_g;
        }
        p *= 2.0;

        let has_u_box = cfg.u_min.is_some() || cfg.u_max.is_some();
        let y_rows: Vec<usize> = if cfg.y_min.is_some() || cfg.y_max.is_some() {
            let channels: Vec<usize> = cfg
                .constrained_outputs
                .clone()
                .unwrap_or_else(|| (0..blocks.p).collect());
            if channels.iter().any(|&ch| ch >= blocks.p) {
                return Err(Error::Config("constrained output channel out of range".into()));
            }
            (0..blocks.n)
                .flat_map(|k| channels.iter().map(move |&ch| k * blocks.p + ch))
                .collect()
        } else {
            Vec::new()
        };
        let rows = up.nrows() + if has_u_box { uf.nrows() } else { 0 } + y_rows.len();
        let mut a = DMatrix::zeros(rows, c);
        a.rows_mut(0, up.nrows()).copy_from(up);
        let mut r = up.nrows();
        if has_u_box {
            a.rows_mut(r, uf.nrows()).copy_from(uf);
            r += uf.nrows();
        }
        for &row in &y_rows {
            a.row_mut(r).copy_from(&yf.row(row));
            r += 1;
        }
        let solver = QpSolver::new(p, a, settings)?;
        Ok(Self {
            blocks,
            cfg,
            solver,
            y_rows,
            has_u_box,
        })
    }

    pub fn blocks(&self) -> &DataBlocks {
        &self.blocks
    }

    pub fn config(&self) -> &DeePCConfig {
        &self.cfg
    }

    pub fn solve(&mut self, u_ini: &DVector<f64>, y_ini: &DVector<f64>, r: &DVector<f64>) -> Result<DeePCSolution> {
        let b = &self.blocks;
        let cfg = &self.cfg;
        if u_ini.len() != b.U_p.nrows() || y_ini.len() != b.Y_p.nrows() || r.len() != b.Y_f.nrows() {
            return Err(Error::Dimension(format!(
                "u_ini {} (want {}), y_ini {} (want {}), reference {} (want {})",
                u_ini.len(),
                b.U_p.nrows(),
                y_ini.len(),
                b.Y_p.nrows(),
                r.len(),
                b.Y_f.nrows()
            )));
        }
        let sy2 = cfg.y_scale.powi(2);
        let q = -(b.Y_f.transpose() * r * cfg.Q + b.Y_p.transpose() * y_ini * cfg.lambda_ini) * (2.0 * sy2);
        let m = self.solver.m();
        let mut l = DVector::zeros(m);
        let mut u = DVector::zeros(m);
        let mut i = 0;
        for k in 0..u_ini.len() {
            l[i] = u_ini[k];
            u[i] = u_ini[k];
            i += 1;
        }
        if self.has_u_box {
            for _ in 0..b.U_f.nrows() {
                l[i] = cfg.u_min.unwrap_or(f64::NEG_INFINITY);
                u[i] = cfg.u_max.unwrap_or(f64::INFINITY);
                i += 1;
            }
        }
        for _ in &self.y_rows {
            l[i] = cfg.y_min.unwrap_or(f64::NEG_INFINITY);
            u[i] = cfg.y_max.unwrap_or(f64::INFINITY);
            i += 1;
        }
        let sol = self.solver.solve(&q, &l, &u)?;
        if sol.status == QpStatus::PrimalInfeasible {
            return Err(Error::Infeasible);
        }
        let g = sol.x;
        let u_opt = &b.U_f * &g;
        let y_pred = &b.Y_f * &g;
        let sigma_y = &b.Y_p * &g - y_ini;
        let objective = sol.objective + sy2 * (cfg.Q * r.norm_squared() + cfg.lambda_ini * y_ini.norm_squared());
        Ok(DeePCSolution {
            u_opt,
            y_pred,
            g,
            sigma_y,
            objective,
            stats: SolverStats {
                status: sol.status,
                method: sol.method,
                iterations: sol.iterations,
                primal_residual: sol.primal_residual,
                dual_residual: sol.dual_residual,
            },
        })
    }
}

/// One-shot DeePC solve.
pub fn solve_deepc(
    blocks: &DataBlocks,
    u_ini: &DVector<f64>,
    y_ini: &DVector<f64>,
    r: &DVector<f64>,
    cfg: &DeePCConfig,
) -> Result<DeePCSolution> {
    DeepcProblem::new(blocks.clone(), cfg.clone(), QpSettings::default())?.solve(u_ini, y_ini, r)
}
