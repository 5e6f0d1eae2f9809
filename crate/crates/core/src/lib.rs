//! Data-enabled predictive control (DeePC) for a REMUS-100 class AUV, with a
//! 6-DOF simulator, classical autopilots, adaptive line-of-sight guidance and
//! a cascaded multi-rate depth controller.

pub mod angles;
pub mod cascade;
pub mod classic;
pub mod deepc;
pub mod error;
pub mod excitation;
pub mod experiments;
pub mod guidance;
pub mod sim;
pub mod vehicle;

pub use error::{Error, Result};
