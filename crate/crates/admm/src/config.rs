use serde::{Deserialize, Serialize};
use sdpsolve::SolverSettings;

use crate::error::{AdmmError, Result};

/// How old the neighbour constants used in S1 may be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Staleness {
    Synchronous,
    /// neighbours' boundary values may lag by one outer iteration
    LagOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    /// ℓ1 weight
    pub alpha: f64,
    /// outer stop on Ψ_max
    pub epsilon: f64,
    /// inclusive range of every random penalty factor
    pub penalty_range: (u64, u64),
    pub max_outer: usize,
    pub max_inner: usize,
    /// inner loop also stops once every subgradient bracket is this narrow
    pub bracket_tol: f64,
    /// weight τ of the private proximal term on the region's own previous boundary values; 0 disables it
    pub prox_weight: f64,
    /// exchange 2v(t+1) − v(t) in the dual step instead of v(t+1)
    pub extrapolate: bool,
    pub staleness: Staleness,
    /// tolerance for each regional SDP
    pub solver_tol: f64,
    pub beta: f64,
    /// codec scale for fixed-point exchange
    pub scale: u64,
    pub word_bits: u32,
    pub seed: u64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            alpha: 0.48,
            epsilon: 1e-6,
            penalty_range: (100, 200),
            max_outer: 200,
            max_inner: 300,
            bracket_tol: 1e-6,
            prox_weight: 1e5,
            extrapolate: true,
            staleness: Staleness::Synchronous,
            solver_tol: 1e-9,
            beta: 0.3,
            scale: phe::DEFAULT_SCALE,
            word_bits: phe::DEFAULT_WORD_BITS,
            seed: 0,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AdmmError::Config(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        let (lo, hi) = self.penalty_range;
        if lo == 0 || lo > hi {
            return bad(format!("penalty_range must satisfy 1 <= min <= max, got [{lo}, {hi}]"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_outer and max_inner must be at least 1".into());
        }
        if !(self.bracket_tol > 0.0 && self.bracket_tol < 1.0) {
            return bad(format!("bracket_tol must lie in (0, 1), got {}", self.bracket_tol));
        }
        if !(self.prox_weight >= 0.0 && self.prox_weight.is_finite()) {
            return bad(format!("prox_weight must be non-negative, got {}", self.prox_weight));
        }
        if self.scale == 0 || !(2..=128).contains(&self.word_bits) {
            return bad("codec scale must be positive and word_bits in 2..=128".into());
        }
        self.solver().validate()?;
        Ok(())
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings { tol: self.solver_tol, beta: self.beta, ..SolverSettings::default() }
    }

    pub fn codec(&self) -> phe::FixedPointCodec {
        phe::FixedPointCodec::new(self.scale, self.word_bits)
    }
}
