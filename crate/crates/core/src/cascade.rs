//! Multi-rate cascaded depth control: an outer DeePC from pitch to depth
//! running every `r_f` ticks and an inner DeePC from stern plane to pitch at
//! the base rate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::classic::PITCH_LIMIT;
use crate::deepc::DeepcController;
use crate::error::{Error, Result};

/// How the pitch command is propagated between outer updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThetaHold {
    /// Ramp from the current to the next command, extrapolated past it.
    #[default]
    Interp,
    /// Hold the next command.
    Zoh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub f_inner: f64,
    pub f_outer: f64,
    #[serde(default)]
    pub theta_d_hold: ThetaHold,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            f_inner: 20.0,
            f_outer: 2.0,
            theta_d_hold: ThetaHold::Interp,
        }
    }
}

impl CascadeConfig {
    pub fn rate_ratio(&self) -> Result<usize> {
        let r = self.f_inner / self.f_outer;
        if !(r >= 1.0) || (r - r.round()).abs() > 1e-9 {
            return Err(Error::Config(format!("f_inner / f_outer must be an integer >= 1, got {r}")));
        }
        Ok(r.round() as usize)
    }
}

/// `n` samples of the line through `(0, cur)` and `(r_f, next)` at ticks
/// `offset + 1 ..= offset + n`.
pub fn interpolated_reference(cur: f64, next: f64, r_f: usize, offset: usize, n: usize) -> DVector<f64> {
    let slope = (next - cur) / r_f as f64;
    DVector::from_fn(n, |i, _| cur + slope * (offset + i + 1) as f64)
}

#[derive(Debug, Clone)]
pub struct Cascade {
    inner: DeepcController,
    outer: DeepcController,
    r_f: usize,
    hold: ThetaHold,
    theta_d_current: f64,
    theta_d_next: f64,
    /// Tick of the last outer update.
    ramp_start: usize,
    last_delta_s: f64,
    outer_solves: usize,
    outer_faults: usize,
    inner_faults: usize,
}

impl Cascade {
    pub fn new(inner: DeepcController, outer: DeepcController, r_f: usize, hold: ThetaHold) -> Result<Self> {
        if r_f == 0 {
            return Err(Error::Config("rate ratio must be at least 1".into()));
        }
        Ok(Self {
            inner,
            outer,
            r_f,
            hold,
            theta_d_current: 0.0,
            theta_d_next: 0.0,
            ramp_start: 0,
            last_delta_s: 0.0,
            outer_solves: 0,
            outer_faults: 0,
            inner_faults: 0,
        })
    }

    pub fn r_f(&self) -> usize {
        self.r_f
    }

    pub fn inner(&self) -> &DeepcController {
        &self.inner
    }

    pub fn outer(&self) -> &DeepcController {
        &self.outer
    }

    pub fn outer_solves(&self) -> usize {
        self.outer_solves
    }

    pub fn faults(&self) -> (usize, usize) {
        (self.inner_faults, self.outer_faults)
    }

    pub fn theta_d_next(&self) -> f64 {
        self.theta_d_next
    }

    /// Fills both histories with a steady trim: zero stern plane, the given
    /// pitch and depth, and a zero pitch command.
    pub fn reset(&mut self, theta: f64, z: f64) {
        self.inner.fill_history(&[0.0], &[theta]);
        self.outer.fill_history(&[theta], &[z]);
        self.theta_d_current = 0.0;
        self.theta_d_next = 0.0;
        self.ramp_start = 0;
        self.last_delta_s = 0.0;
    }

    /// Records the sample of tick `k` for the outer windows when
    /// `k mod r_f = r_f - 1`, so that an update at `k + 1` sees samples
    /// `k, k - r_f, ...`.
    pub fn record(&mut self, k: usize, theta: f64, z: f64) {
        if k % self.r_f == self.r_f - 1 {
            self.outer.push(&[theta], &[z]);
        }
    }

    /// Pitch command in effect at tick `k`.
    pub fn theta_d_at(&self, k: usize) -> f64 {
        match self.hold {
            ThetaHold::Zoh => self.theta_d_next,
            ThetaHold::Interp => {
                let off = k.saturating_sub(self.ramp_start) as f64;
                self.theta_d_current + (self.theta_d_next - self.theta_d_current) * off / self.r_f as f64
            }
        }
    }

    /// Outer update at tick `k` (a multiple of `r_f`) against depth
    /// references at ticks `k + r_f, k + 2 r_f, ...`. On a solver fault the
    /// previous command is kept. Returns the new `theta_d_next`.
    pub fn outer_step(&mut self, k: usize, z_d: &DVector<f64>) -> Result<f64> {
        if k % self.r_f != 0 {
            return Err(Error::Config(format!("outer update at tick {k} is off the {}-tick grid", self.r_f)));
        }
        let offset = self.outer.y_window().last().cloned();
        let out = self.outer.solve(z_d, offset.as_ref());
        self.outer_solves += 1;
        let current = self.theta_d_at(k);
        if out.fault {
            self.outer_faults += 1;
        } else {
            self.theta_d_next = out.u[0].clamp(-PITCH_LIMIT, PITCH_LIMIT);
            self.outer.set_last_input(&[self.theta_d_next]);
        }
        self.theta_d_current = current;
        self.ramp_start = k;
        Ok(self.theta_d_next)
    }

    /// Inner reference for ticks `k + 1 ..= k + T_fut`.
    pub fn inner_reference(&self, k: usize) -> DVector<f64> {
        let n = self.inner.horizon();
        match self.hold {
            ThetaHold::Zoh => DVector::from_element(n, self.theta_d_next),
            ThetaHold::Interp => interpolated_reference(
                self.theta_d_current,
                self.theta_d_next,
                self.r_f,
                k.saturating_sub(self.ramp_start),
                n,
            ),
        }
    }

    /// Inner update at tick `k` with measured pitch; returns the stern-plane
    /// angle. On a fault the previous angle is held.
    pub fn inner_step(&mut self, k: usize, theta: f64) -> (f64, bool) {
        if k > 0 {
            self.inner.push(&[self.last_delta_s], &[theta]);
        }
        let r = self.inner_reference(k);
        let out = self.inner.solve(&r, None);
        if out.fault {
            self.inner_faults += 1;
        }
        self.last_delta_s = out.u[0];
        (out.u[0], out.fault)
    }
}
