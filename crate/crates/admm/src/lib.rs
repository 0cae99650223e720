//! ℓ1-relaxed consensus ADMM over per-region SDP relaxations. The S1 step
//! bisects the ℓ1 subgradient from sign messages; S2 adds randomly penalized
//! boundary differences to the duals. All inter-agent traffic goes through
//! the [`Exchange`] trait, implemented here in plaintext and elsewhere under
//! encryption.

pub mod config;
pub mod driver;
pub mod error;
pub mod exchange;
pub mod primal;
pub mod secrets;
pub mod state;
pub mod topology;

pub use config::{AdmmConfig, Staleness};
pub use driver::{run, write_trace_csv, AdmmProblem, DualRecord, RunResult, TraceRow};
pub use error::{AdmmError, Result};
pub use exchange::{classify_weighted, realize_increment, Exchange, PlainExchange, SignReply};
pub use primal::{primal_update, SignRecord};
pub use secrets::PenaltySecrets;
pub use state::{converged, dual_update, residual, subgradient_signs_plain, DualState, InnerStop, RegionState};
pub use topology::Topology;

/// Plaintext exchange with per-agent secrets fanned out from the config seed.
pub fn plain_exchange(topo: &Topology, cfg: &AdmmConfig) -> PlainExchange {
    let secrets = (0..topo.n_regions()).map(|r| PenaltySecrets::new(cfg.seed, r, cfg.penalty_range)).collect();
    PlainExchange::new(topo.clone(), secrets, cfg.codec())
}
