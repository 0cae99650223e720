use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sdpform::EntryKind;
use sha2::{Digest, Sha256};

/// One agent's private penalty factors. Every factor is a pure function of the
/// agent seed and its (neighbour, t, k) coordinates, so encrypted and plaintext
/// runs draw identical values without sharing a stream.
#[derive(Clone, Debug)]
pub struct PenaltySecrets {
    pub region: usize,
    seed: [u8; 32],
    range: (u64, u64),
}

fn derive(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

impl PenaltySecrets {
    /// Fans the master seed out to agent `region`.
    pub fn new(master_seed: u64, region: usize, range: (u64, u64)) -> Self {
        let seed = derive(&[b"agent", &master_seed.to_le_bytes(), &(region as u64).to_le_bytes()]);
        PenaltySecrets { region, seed, range }
    }

    fn draw(&self, tag: &[u8], l: usize, t: usize, k: usize, kinds: &[EntryKind]) -> Vec<u64> {
        let s = derive(&[&self.seed, tag, &(l as u64).to_le_bytes(), &(t as u64).to_le_bytes(), &(k as u64).to_le_bytes()]);
        let mut rng = ChaCha20Rng::from_seed(s);
        kinds
            .iter()
            .map(|kind| {
                // one draw for real-part classes, one for imaginary, so the two streams stay independent
                let re = rng.gen_range(self.range.0..=self.range.1);
                let im = rng.gen_range(self.range.0..=self.range.1);
                if matches!(kind, EntryKind::Im(..)) { im } else { re }
            })
            .collect()
    }

    /// a_{r↦l}(t) for X entries and b_{r↦l}(t) for Z entries, per boundary scalar shared with l.
    pub fn dual_factors(&self, l: usize, t: usize, kinds: &[EntryKind]) -> Vec<u64> {
        self.draw(b"dual", l, t, 0, kinds)
    }

    /// c_{r↦l}(k) for X entries and d_{r↦l}(k) for Z entries, used when serving l's sign query.
    pub fn primal_factors(&self, l: usize, t: usize, k: usize, kinds: &[EntryKind]) -> Vec<u64> {
        self.draw(b"primal", l, t, k, kinds)
    }

    pub fn range(&self) -> (u64, u64) {
        self.range
    }

    /// Seed for one of the agent's other private streams (key pairs, nonces) at outer iteration t.
    pub fn stream_seed(&self, tag: &[u8], t: usize) -> [u8; 32] {
        derive(&[&self.seed, b"stream", tag, &(t as u64).to_le_bytes()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_are_reproducible_and_in_range() {
        let kinds = [EntryKind::Diag(2), EntryKind::Diag(3), EntryKind::Re(2, 3), EntryKind::Im(2, 3)];
        let a = PenaltySecrets::new(7, 0, (100, 200));
        let b = PenaltySecrets::new(7, 0, (100, 200));
        assert_eq!(a.dual_factors(1, 4, &kinds), b.dual_factors(1, 4, &kinds));
        assert_ne!(a.dual_factors(1, 4, &kinds), a.dual_factors(1, 5, &kinds));
        assert_ne!(a.primal_factors(1, 4, 0, &kinds), a.primal_factors(1, 4, 1, &kinds));
        let other = PenaltySecrets::new(7, 1, (100, 200));
        assert_ne!(a.dual_factors(1, 4, &kinds), other.dual_factors(0, 4, &kinds));
        for t in 0..200 {
            for f in a.dual_factors(1, t, &kinds) {
                assert!((100..=200).contains(&f));
            }
        }
    }

    #[test]
    fn factors_are_fresh_across_iterations() {
        let kinds = [EntryKind::Diag(0)];
        let a = PenaltySecrets::new(1, 0, (100, 200));
        let draws: Vec<u64> = (0..2000).map(|t| a.dual_factors(1, t, &kinds)[0]).collect();
        let repeats = draws.windows(2).filter(|w| w[0] == w[1]).count();
        // one value in 101, so about 20 repeats are expected
        assert!(repeats < 60, "{repeats}");
        let realized: Vec<u64> = (0..2000).map(|t| draws[t] * PenaltySecrets::new(1, 1, (100, 200)).dual_factors(0, t, &kinds)[0]).collect();
        assert!(realized.iter().all(|&r| (10_000..=40_000).contains(&r)));
    }
}
