//! Reference points for the encrypted algorithm: the centralized relaxed OPF
//! and ADMM with noise-perturbed state sharing.

pub mod central;
pub mod dp;
pub mod error;
pub mod noise;

pub use central::{gap1, gap2, solve_centralized, CentralSolution};
pub use dp::{run_dp_baseline, DpExchange};
pub use error::{BaselineError, Result};
pub use noise::{NoiseKind, NoiseSchedule};
