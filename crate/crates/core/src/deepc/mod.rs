//! Data-enabled predictive control: data matrices, the condensed QP and the
//! receding-horizon controller.

pub mod controller;
pub mod data;
pub mod dataset;
pub mod problem;
pub mod qp;

pub use controller::{DeepcController, StepOutput};
pub use data::{
    build_hankel, build_page, partition, persistency_report, DataBlocks, DataMatrixKind, PersistencyReport,
};
pub use dataset::{Dataset, DatasetMeta};
pub use problem::{solve_deepc, DeePCConfig, DeePCSolution, DeepcProblem, SolverStats};
pub use qp::{qp_solve, QpMethod, QpSettings, QpSolution, QpSolver, QpStatus};
