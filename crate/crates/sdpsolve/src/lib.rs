//! Dense primal-dual interior-point solver for block-diagonal standard-form SDPs.

pub mod error;
pub mod ipm;
pub mod problem;

pub use error::{Result, SdpError};
pub use ipm::{sig12, solve, SdpIterate, SolveReport, SolveStatus, SolverSettings, TraceRow};
pub use problem::{dual_feasibility, dual_objective, min_eig, BlockMat, Entry, SdpProblem, SparseSym};
