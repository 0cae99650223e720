use admm::{plain_exchange, run, AdmmConfig, AdmmProblem, Exchange, PenaltySecrets, PlainExchange, RunResult, SignReply};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::noise::NoiseSchedule;

/// Plaintext exchange in which every agent perturbs the states it shares with
/// uniform noise in [−bound(t), bound(t)], both as a primal constant and in the dual step.
#[derive(Clone, Debug)]
pub struct DpExchange {
    inner: PlainExchange,
    schedule: NoiseSchedule,
    secrets: Vec<PenaltySecrets>,
}

impl DpExchange {
    pub fn new(problem: &AdmmProblem, cfg: &AdmmConfig, schedule: NoiseSchedule) -> Self {
        let secrets = (0..problem.topo.n_regions()).map(|r| PenaltySecrets::new(cfg.seed, r, cfg.penalty_range)).collect();
        DpExchange { inner: plain_exchange(&problem.topo, cfg), schedule, secrets }
    }

    fn perturb(&self, tag: &[u8], t: usize, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        // outer iteration t is the (t+1)-th exchange
        let b = self.schedule.bound(t + 1);
        values
            .iter()
            .zip(&self.secrets)
            .map(|(v, s)| {
                if b == 0.0 {
                    return v.clone();
                }
                let mut rng = ChaCha20Rng::from_seed(s.stream_seed(tag, t));
                v.iter().map(|x| x + rng.gen_range(-b..=b)).collect()
            })
            .collect()
    }
}

impl Exchange for DpExchange {
    fn begin_outer(&mut self, t: usize, constants: &[Vec<f64>]) -> admm::Result<()> {
        let noisy = self.perturb(b"dp-primal", t, constants);
        self.inner.begin_outer(t, &noisy)
    }

    fn primal_signs(&mut self, t: usize, k: usize, r: usize, values: &[f64]) -> admm::Result<SignReply> {
        self.inner.primal_signs(t, k, r, values)
    }

    fn dual_increments(&mut self, t: usize, values: &[Vec<f64>]) -> admm::Result<Vec<Vec<f64>>> {
        let noisy = self.perturb(b"dp-dual", t, values);
        self.inner.dual_increments(t, &noisy)
    }
}

/// ADMM with noise-perturbed sharing. Not reaching ε within `max_outer` is reported in the result, not an error.
pub fn run_dp_baseline(problem: &AdmmProblem, cfg: &AdmmConfig, schedule: NoiseSchedule) -> Result<RunResult> {
    let mut ex = DpExchange::new(problem, cfg, schedule);
    Ok(run(problem, cfg, &mut ex)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;
    use netmodel::canonical::{feeder8, feeder8_two_regions};
    use netmodel::partition;

    fn setup() -> (AdmmProblem, AdmmConfig) {
        let cfg = AdmmConfig::default();
        let net = feeder8();
        let p = partition(&net, &feeder8_two_regions()).unwrap();
        (AdmmProblem::new(&net, &p, &cfg), cfg)
    }

    #[test]
    fn noise_stays_inside_the_bound_and_is_reproducible() {
        let (problem, cfg) = setup();
        let ex = DpExchange::new(&problem, &cfg, NoiseSchedule::new(NoiseKind::InverseSquare, 0.5).unwrap());
        let base = problem.topo.flat_start();
        let a = ex.perturb(b"dp-primal", 1, &base);
        assert_eq!(a, ex.perturb(b"dp-primal", 1, &base));
        assert_ne!(a, ex.perturb(b"dp-dual", 1, &base));
        for (x, y) in a.iter().flatten().zip(base.iter().flatten()) {
            assert!((x - y).abs() <= 0.5 / 4.0);
            assert_ne!(x, y);
        }
    }

    #[test]
    fn zero_noise_changes_nothing() {
        let (problem, cfg) = setup();
        let ex = DpExchange::new(&problem, &cfg, NoiseSchedule::new(NoiseKind::Exponential, 0.0).unwrap());
        let base = problem.topo.flat_start();
        assert_eq!(ex.perturb(b"dp-dual", 3, &base), base);
    }
}
