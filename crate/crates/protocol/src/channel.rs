use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{ProtocolError, Result};
use crate::message::{Envelope, Meta, Party, Payload};

/// Delivery order of the simulated channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delivery {
    /// inboxes are FIFO
    Deterministic,
    /// each new message lands at a random inbox position; receivers select by metadata,
    /// so results must not change
    Shuffled { seed: u64 },
}

/// In-process message bus. Every envelope is kept in send order as the transcript.
#[derive(Debug)]
pub struct Network {
    delivery: Delivery,
    rng: ChaCha20Rng,
    inboxes: BTreeMap<Party, Vec<Envelope>>,
    log: Vec<Envelope>,
    rejected: usize,
}

impl Network {
    pub fn new(delivery: Delivery) -> Self {
        let seed = match delivery {
            Delivery::Deterministic => 0,
            Delivery::Shuffled { seed } => seed,
        };
        Network { delivery, rng: ChaCha20Rng::seed_from_u64(seed), inboxes: BTreeMap::new(), log: Vec::new(), rejected: 0 }
    }

    pub fn send(&mut self, from: Party, to: Party, secure: bool, meta: Meta, payload: Payload) -> u64 {
        let seq = self.log.len() as u64;
        let env = Envelope { seq, from, to, secure, meta, payload };
        self.log.push(env.clone());
        let inbox = self.inboxes.entry(to).or_default();
        match self.delivery {
            Delivery::Deterministic => inbox.push(env),
            Delivery::Shuffled { .. } => {
                let at = self.rng.gen_range(0..=inbox.len());
                inbox.insert(at, env);
            }
        }
        seq
    }

    /// Removes and returns the first message for `to` matching `want`.
    pub fn take(&mut self, to: Party, want: impl Fn(&Envelope) -> bool) -> Result<Envelope> {
        let inbox = self.inboxes.entry(to).or_default();
        match inbox.iter().position(want) {
            Some(i) => Ok(inbox.remove(i)),
            None => Err(ProtocolError::Missing(format!("no matching message for {to}"))),
        }
    }

    /// Drops everything addressed to `to` from an outer iteration before `t`.
    pub fn reject_stale(&mut self, to: Party, t: usize) -> usize {
        let inbox = self.inboxes.entry(to).or_default();
        let before = inbox.len();
        inbox.retain(|e| e.meta.t >= t);
        let n = before - inbox.len();
        self.rejected += n;
        n
    }

    pub fn pending(&self, to: Party) -> usize {
        self.inboxes.get(&to).map_or(0, |v| v.len())
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn log(&self) -> &[Envelope] {
        &self.log
    }

    pub fn transcript(&self) -> String {
        let mut s = String::new();
        for e in &self.log {
            s.push_str(&e.transcript_line());
            s.push('\n');
        }
        s
    }
}
