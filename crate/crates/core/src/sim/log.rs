use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vehicle::{ControlInput, VehicleState};

pub const CSV_HEADER: &str =
    "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,delta_s,delta_r,n_p,psi_d,theta_d,z_d,beta_hat,alpha_hat,fault";

/// Reference and guidance signals active at a tick. Channels that are not
/// controlled are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct References {
    pub psi_d: f64,
    pub theta_d: f64,
    pub z_d: f64,
    pub beta_hat: f64,
    pub alpha_hat: f64,
}

impl Default for References {
    fn default() -> Self {
        Self {
            psi_d: f64::NAN,
            theta_d: f64::NAN,
            z_d: f64::NAN,
            beta_hat: f64::NAN,
            alpha_hat: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub state: VehicleState,
    pub ctrl: ControlInput,
    pub refs: References,
    pub fault: bool,
}

/// Samples on the uniform inner-loop grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    rows: Vec<LogRow>,
}

impl TrajectoryLog {
    pub fn push(&mut self, row: LogRow) {
        debug_assert!(self.rows.last().is_none_or(|last| row.t > last.t));
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn fault_count(&self) -> usize {
        self.rows.iter().filter(|r| r.fault).count()
    }

    /// CSV text; floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 256);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.t);
            for v in row.state.eta.iter().chain(row.state.nu.iter()) {
                let _ = write!(out, ",{v}");
            }
            let c = row.ctrl;
            let r = row.refs;
            let _ = writeln!(
                out,
                ",{},{},{},{},{},{},{},{},{}",
                c.delta_s,
                c.delta_r,
                c.n_p,
                r.psi_d,
                r.theta_d,
                r.z_d,
                r.beta_hat,
                r.alpha_hat,
                u8::from(row.fault)
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let mut log = TrajectoryLog::default();
        let mut state = VehicleState::at_surge(0.1 + 0.2);
        state.eta[5] = -1.0 / 3.0;
        log.push(LogRow {
            t: 0.05,
            state,
            ctrl: ControlInput::new(1e-7, 0.0, 1000.0),
            refs: References::default(),
            fault: true,
        });
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[7].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fields[6].parse::<f64>().unwrap(), -1.0 / 3.0);
        assert_eq!(fields[13].parse::<f64>().unwrap(), 1e-7);
        assert_eq!(fields[16], "NaN");
        assert_eq!(fields[21], "1");
    }
}
