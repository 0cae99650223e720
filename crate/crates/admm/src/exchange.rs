use num_bigint::BigInt;
use phe::FixedPointCodec;

use crate::error::Result;
use crate::secrets::PenaltySecrets;
use crate::topology::Topology;

/// Operator verdict for one region's boundary at one inner step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignReply {
    /// +1, −1 or 0 per boundary scalar in the region spec's order
    pub signs: Vec<i8>,
    /// every weighted difference is zero at codec resolution
    pub converged: bool,
}

/// The communication side of the algorithm: who holds which constants and how
/// signs and dual increments reach each agent.
pub trait Exchange {
    /// Start of outer iteration t; `constants[r]` is what agent r holds as X^r_l(t), Z^r_l(t).
    fn begin_outer(&mut self, t: usize, constants: &[Vec<f64>]) -> Result<()>;
    /// Sign messages for region r's current inner iterate.
    fn primal_signs(&mut self, t: usize, k: usize, r: usize, values: &[f64]) -> Result<SignReply>;
    /// Per region, the realized ρ∘(own − neighbour) (κ for Z entries) for each boundary scalar.
    fn dual_increments(&mut self, t: usize, values: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

/// Sign of a decoded weighted difference and whether it counts as zero:
/// |c·Δ| ≤ c_max in fixed-point words, i.e. Δ rounds to zero at codec resolution.
pub fn classify_weighted(w: i128, c_max: u64) -> (i8, bool) {
    (w.signum() as i8, w.unsigned_abs() <= c_max as u128)
}

/// Agent r's value of the dual step from the decoded a_{l↦r}·(X^l − X^r): scale by
/// its own factor and negate, giving ρ_rl·(X^r − X^l).
pub fn realize_increment(decoded: f64, own_factor: u64) -> f64 {
    -(decoded * own_factor as f64)
}

/// Reference exchange in plaintext. It performs the same fixed-point integer
/// arithmetic as the encrypted protocol, so the two agree bit for bit.
#[derive(Clone, Debug)]
pub struct PlainExchange {
    topo: Topology,
    secrets: Vec<PenaltySecrets>,
    codec: FixedPointCodec,
    constants: Vec<Vec<f64>>,
}

impl PlainExchange {
    pub fn new(topo: Topology, secrets: Vec<PenaltySecrets>, codec: FixedPointCodec) -> Self {
        let constants = topo.specs.iter().map(|s| vec![0.0; s.boundary.len()]).collect();
        PlainExchange { topo, secrets, codec, constants }
    }
}

impl Exchange for PlainExchange {
    fn begin_outer(&mut self, _t: usize, constants: &[Vec<f64>]) -> Result<()> {
        self.constants = constants.to_vec();
        Ok(())
    }

    fn primal_signs(&mut self, t: usize, k: usize, r: usize, values: &[f64]) -> Result<SignReply> {
        let spec = &self.topo.specs[r];
        let mut signs = vec![0i8; values.len()];
        let mut converged = true;
        for l in spec.neighbors() {
            let idx = self.topo.entries_with(r, l);
            let kinds = self.topo.kinds_with(r, l);
            let c = self.secrets[l].primal_factors(r, t, k, &kinds);
            let c_max = self.secrets[l].range().1;
            for (pos, &e) in idx.iter().enumerate() {
                let mine = self.codec.encode_word(values[e])?;
                let theirs = self.codec.encode_word(self.constants[l][self.topo.counterpart[r][e]])?;
                let (s, zero) = classify_weighted(c[pos] as i128 * (mine - theirs), c_max);
                signs[e] = s;
                converged &= zero;
            }
        }
        Ok(SignReply { signs, converged })
    }

    fn dual_increments(&mut self, t: usize, values: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = values.iter().map(|v| vec![0.0; v.len()]).collect();
        for (r, spec) in self.topo.specs.iter().enumerate() {
            for l in spec.neighbors() {
                let idx = self.topo.entries_with(r, l);
                let kinds = self.topo.kinds_with(r, l);
                let theirs_f = self.secrets[l].dual_factors(r, t, &kinds);
                let mine_f = self.secrets[r].dual_factors(l, t, &kinds);
                for (pos, &e) in idx.iter().enumerate() {
                    let mine = self.codec.encode_word(values[r][e])?;
                    let theirs = self.codec.encode_word(values[l][self.topo.counterpart[r][e]])?;
                    let received = BigInt::from(theirs_f[pos] as i128 * (theirs - mine));
                    out[r][e] = realize_increment(self.codec.decode_signed(&received), mine_f[pos]);
                }
            }
        }
        Ok(out)
    }
}
