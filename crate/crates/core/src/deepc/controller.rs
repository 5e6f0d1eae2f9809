use std::collections::VecDeque;

use nalgebra::DVector;

use crate::deepc::data::DataBlocks;
use crate::deepc::problem::{DeePCConfig, DeePCSolution, DeepcProblem};
use crate::deepc::qp::{QpSettings, QpStatus};
use crate::error::{Error, Result};

/// Result of one receding-horizon step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// First input block of the optimal sequence, or the held input on a
    /// fault.
    pub u: DVector<f64>,
    pub solution: Option<DeePCSolution>,
    pub fault: bool,
}

/// Receding-horizon DeePC with rolling windows of the last `T_ini` input and
/// output samples.
///
/// Samples are pushed as `(u_t, y_{t+1})` pairs: the input applied at one
/// tick together with the measurement it produced at the next. The offline
/// data must follow the same convention.
#[derive(Debug, Clone)]
pub struct DeepcController {
    problem: DeepcProblem,
    u_past: VecDeque<DVector<f64>>,
    y_past: VecDeque<DVector<f64>>,
    last_u: DVector<f64>,
    faults: usize,
    solves: usize,
    total_iterations: usize,
}

impl DeepcController {
    pub fn new(blocks: DataBlocks, cfg: DeePCConfig, settings: QpSettings) -> Result<Self> {
        let m = blocks.m;
        let problem = DeepcProblem::new(blocks, cfg, settings)?;
        Ok(Self {
            problem,
            u_past: VecDeque::new(),
            y_past: VecDeque::new(),
            last_u: DVector::zeros(m),
            faults: 0,
            solves: 0,
            total_iterations: 0,
        })
    }

    pub fn problem(&self) -> &DeepcProblem {
        &self.problem
    }

    pub fn t_ini(&self) -> usize {
        self.problem.config().T_ini
    }

    pub fn horizon(&self) -> usize {
        self.problem.config().T_fut
    }

    /// Fills both windows with a constant sample, e.g. a steady trim.
    pub fn fill_history(&mut self, u: &[f64], y: &[f64]) {
        self.u_past.clear();
        self.y_past.clear();
        for _ in 0..self.t_ini() {
            self.push(u, y);
        }
        self.last_u = DVector::from_column_slice(u);
    }

    pub fn push(&mut self, u: &[f64], y: &[f64]) {
        let t = self.t_ini();
        self.u_past.push_back(DVector::from_column_slice(u));
        self.y_past.push_back(DVector::from_column_slice(y));
        while self.u_past.len() > t {
            self.u_past.pop_front();
            self.y_past.pop_front();
        }
    }

    pub fn u_window(&self) -> Vec<DVector<f64>> {
        self.u_past.iter().cloned().collect()
    }

    pub fn y_window(&self) -> Vec<DVector<f64>> {
        self.y_past.iter().cloned().collect()
    }

    pub fn last_input(&self) -> &DVector<f64> {
        &self.last_u
    }

    pub fn fault_count(&self) -> usize {
        self.faults
    }

    pub fn solve_count(&self) -> usize {
        self.solves
    }

    pub fn total_iterations(&self) -> usize {
        self.total_iterations
    }

    fn stacked(window: &VecDeque<DVector<f64>>, offset: Option<&DVector<f64>>) -> DVector<f64> {
        let d = window.front().map_or(0, |v| v.len());
        let mut out = DVector::zeros(window.len() * d);
        for (k, v) in window.iter().enumerate() {
            let mut v = v.clone();
            if let Some(o) = offset {
                v -= o;
            }
            out.rows_mut(k * d, d).copy_from(&v);
        }
        out
    }

    /// Solves with the current windows against the reference `r`
    /// (`T_fut * p` values). When `y_offset` is given it is subtracted from
    /// the output window and the reference, which is exact for outputs whose
    /// dynamics are translation invariant (heading, depth).
    pub fn solve(&mut self, r: &DVector<f64>, y_offset: Option<&DVector<f64>>) -> StepOutput {
        let result = self.try_solve(r, y_offset);
        self.solves += 1;
        match result {
            Ok(sol) if sol.stats.status == QpStatus::Solved => {
                self.total_iterations += sol.stats.iterations;
                let m = self.last_u.len();
                self.last_u = sol.u_opt.rows(0, m).into_owned();
                StepOutput {
                    u: self.last_u.clone(),
                    solution: Some(sol),
                    fault: false,
                }
            }
            Ok(sol) => {
                self.total_iterations += sol.stats.iterations;
                self.faults += 1;
                StepOutput {
                    u: self.last_u.clone(),
                    solution: Some(sol),
                    fault: true,
                }
            }
            Err(_) => {
                self.faults += 1;
                StepOutput {
                    u: self.last_u.clone(),
                    solution: None,
                    fault: true,
                }
            }
        }
    }

    fn try_solve(&mut self, r: &DVector<f64>, y_offset: Option<&DVector<f64>>) -> Result<DeePCSolution> {
        let t = self.t_ini();
        if self.u_past.len() < t {
            return Err(Error::InsufficientData {
                required: t,
                available: self.u_past.len(),
            });
        }
        let u_ini = Self::stacked(&self.u_past, None);
        let y_ini = Self::stacked(&self.y_past, y_offset);
        let r = match y_offset {
            Some(o) => {
                let p = o.len();
                DVector::from_fn(r.len(), |i, _| r[i] - o[i % p])
            }
            None => r.clone(),
        };
        self.problem.solve(&u_ini, &y_ini, &r)
    }

    /// Pushes `(u_prev, y)` and solves; returns the input to apply now.
    pub fn step(&mut self, u_prev: &[f64], y: &[f64], r: &DVector<f64>) -> StepOutput {
        self.push(u_prev, y);
        self.solve(r, None)
    }

    /// Records that `u` was applied although it came from elsewhere (e.g. a
    /// fallback), so the next fault holds it.
    pub fn set_last_input(&mut self, u: &[f64]) {
        self.last_u = DVector::from_column_slice(u);
    }
}
