use admm::{plain_exchange, run, AdmmConfig, AdmmProblem, RunResult};

use crate::exchange::{ProtocolConfig, ProtocolExchange};

/// One trajectory executed through the encrypted protocol and through the plaintext exchange.
#[derive(Debug)]
pub struct TwinRun {
    pub plain: RunResult,
    pub encrypted: RunResult,
    pub exchange: ProtocolExchange,
}

impl TwinRun {
    pub fn signs_identical(&self) -> bool {
        self.plain.signs == self.encrypted.signs
    }

    /// Largest per-entry gap between the two runs' dual increments; infinite if the logs do not line up.
    pub fn max_increment_gap(&self) -> f64 {
        let (a, b) = (&self.plain.dual_log, &self.encrypted.dual_log);
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        let mut gap = 0.0f64;
        for (x, y) in a.iter().zip(b) {
            if (x.t, x.region) != (y.t, y.region) || x.increments.len() != y.increments.len() {
                return f64::INFINITY;
            }
            for (u, v) in x.increments.iter().zip(&y.increments) {
                gap = gap.max((u - v).abs());
            }
        }
        gap
    }

    /// Largest gap between the final boundary values of the two runs.
    pub fn max_state_gap(&self) -> f64 {
        self.plain
            .states
            .iter()
            .zip(&self.encrypted.states)
            .flat_map(|(a, b)| a.boundary.iter().zip(&b.boundary).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// ADMM with every exchange going through the encrypted protocol.
pub fn run_encrypted(problem: &AdmmProblem, cfg: &AdmmConfig, pcfg: &ProtocolConfig) -> admm::Result<(RunResult, ProtocolExchange)> {
    let mut ex = ProtocolExchange::new(&problem.topo, cfg, pcfg)?;
    let res = run(problem, cfg, &mut ex)?;
    Ok((res, ex))
}

pub fn twin_run(problem: &AdmmProblem, cfg: &AdmmConfig, pcfg: &ProtocolConfig) -> admm::Result<TwinRun> {
    let (encrypted, exchange) = run_encrypted(problem, cfg, pcfg)?;
    let plain = run(problem, cfg, &mut plain_exchange(&problem.topo, cfg))?;
    Ok(TwinRun { plain, encrypted, exchange })
}
