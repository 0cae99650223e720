use std::collections::BTreeMap;

use admm::{realize_increment, AdmmConfig, Exchange, PenaltySecrets, SignReply, Topology};
use num_bigint::{BigInt, BigUint};
use phe::{Ciphertext, FixedPointCodec, PaillierPrivateKey, PaillierPublicKey};

use crate::channel::{Delivery, Network};
use crate::endpoint::{check_capacity, difference_bound, AgentEndpoint, OperatorEndpoint, Sealed};
use crate::error::{ProtocolError, Result};
use crate::message::{Envelope, Meta, Party, Payload, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub key_bits: u64,
    pub delivery: Delivery,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { key_bits: 512, delivery: Delivery::Deterministic }
    }
}

/// Plaintext and nonce behind one ciphertext of an `EncryptedBoundary`.
#[derive(Clone, Debug)]
pub struct SealedWitness {
    pub word: i128,
    pub nonce: BigUint,
}

/// What the serving agent l mixed into one entry of a weighted difference.
#[derive(Clone, Debug)]
pub struct ComposedWitness {
    /// (seq, position) of the ciphertext it combined with
    pub source: (u64, usize),
    /// l's own word, before the sign the phase gives it
    pub word: i128,
    pub nonce: BigUint,
    pub factor: u64,
}

/// Harness-side record of every secret behind the transcript. No endpoint reads it;
/// the audit uses it as ground truth.
#[derive(Clone, Debug, Default)]
pub struct GroundTruth {
    pub sealed: BTreeMap<(u64, usize), SealedWitness>,
    pub composed: BTreeMap<(u64, usize), ComposedWitness>,
    pub keys: BTreeMap<String, (PaillierPublicKey, PaillierPrivateKey)>,
}

/// Statistics of one encrypted run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExchangeStats {
    pub encryptions: usize,
    pub decryptions: usize,
    pub messages: usize,
    pub key_rotations: usize,
}

/// Algorithms 2 and 3 over simulated channels, one endpoint per agent plus the operator.
#[derive(Debug)]
pub struct ProtocolExchange {
    topo: Topology,
    codec: FixedPointCodec,
    c_max: u64,
    bound: BigInt,
    agents: Vec<AgentEndpoint>,
    operator: OperatorEndpoint,
    net: Network,
    truth: GroundTruth,
    stats: ExchangeStats,
}

fn hexes(cts: &[Ciphertext]) -> Vec<String> {
    cts.iter().map(|c| c.to_hex()).collect()
}

fn parse(payload: &Payload, key: &PaillierPublicKey) -> Result<Vec<Ciphertext>> {
    let (id, list) = match payload {
        Payload::EncryptedBoundary { key_id, ciphertexts }
        | Payload::EncryptedWeightedDiff { key_id, ciphertexts }
        | Payload::DualWeightedDiff { key_id, ciphertexts } => (key_id, ciphertexts),
        other => return Err(ProtocolError::Malformed(format!("expected ciphertexts, got {}", other.name()))),
    };
    if id != key.key_id() {
        return Err(ProtocolError::Crypto(phe::PheError::KeyMismatch { expected: key.key_id().into(), found: id.clone() }));
    }
    list.iter().map(|h| Ok(Ciphertext::from_hex(h, id)?)).collect()
}

fn is_kind(e: &Envelope, from: Party, meta: Meta, kind: &str) -> bool {
    e.from == from && e.meta == meta && e.payload.name() == kind
}

impl ProtocolExchange {
    pub fn new(topo: &Topology, cfg: &AdmmConfig, pcfg: &ProtocolConfig) -> Result<Self> {
        let codec = cfg.codec();
        let c_max = cfg.penalty_range.1;
        check_capacity(pcfg.key_bits, &codec, c_max)?;
        let agents = (0..topo.n_regions())
            .map(|r| AgentEndpoint::new(PenaltySecrets::new(cfg.seed, r, cfg.penalty_range), codec, pcfg.key_bits))
            .collect();
        Ok(ProtocolExchange {
            topo: topo.clone(),
            codec,
            c_max,
            bound: difference_bound(&codec, c_max),
            agents,
            operator: OperatorEndpoint::default(),
            net: Network::new(pcfg.delivery),
            truth: GroundTruth::default(),
            stats: ExchangeStats::default(),
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn transcript(&self) -> String {
        self.net.transcript()
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn codec(&self) -> FixedPointCodec {
        self.codec
    }

    pub fn penalty_max(&self) -> u64 {
        self.c_max
    }

    pub fn operator(&self) -> &OperatorEndpoint {
        &self.operator
    }

    pub fn stats(&self) -> ExchangeStats {
        ExchangeStats { messages: self.net.log().len(), ..self.stats.clone() }
    }

    fn send(&mut self, from: Party, to: Party, secure: bool, meta: Meta, payload: Payload) -> u64 {
        self.net.send(from, to, secure, meta, payload)
    }

    fn rotate_keys(&mut self, t: usize) -> Result<()> {
        self.operator.clear_keys();
        for r in 0..self.agents.len() {
            let (pk, sk) = self.agents[r].rotate(t)?;
            self.stats.key_rotations += 1;
            self.truth.keys.insert(pk.key_id().to_string(), (pk.clone(), sk.clone()));
            let meta = Meta { phase: Phase::Keys, t, k: 0, r, l: r };
            let public = Payload::PublicKey { key_id: pk.key_id().into(), n: pk.n.to_str_radix(16) };
            for l in self.topo.specs[r].neighbors() {
                self.send(Party::Agent(r), Party::Agent(l), false, meta, public.clone());
            }
            self.send(Party::Agent(r), Party::Operator, false, meta, public);
            self.send(Party::Agent(r), Party::Operator, true, meta, Payload::PrivateKeyHandoff { key_id: sk.key_id().into(), key: sk.to_json() });
        }
        for r in 0..self.agents.len() {
            let meta = Meta { phase: Phase::Keys, t, k: 0, r, l: r };
            for l in self.topo.specs[r].neighbors() {
                let e = self.net.take(Party::Agent(l), |e| is_kind(e, Party::Agent(r), meta, "public_key"))?;
                self.agents[l].learn_key(r, public_from(&e.payload)?);
            }
            let e = self.net.take(Party::Operator, |e| is_kind(e, Party::Agent(r), meta, "public_key"))?;
            self.operator.learn_public(r, public_from(&e.payload)?);
            let e = self.net.take(Party::Operator, |e| is_kind(e, Party::Agent(r), meta, "private_key_handoff"))?;
            match e.payload {
                Payload::PrivateKeyHandoff { key, .. } => self.operator.learn_private(r, PaillierPrivateKey::from_json(&key)?),
                _ => unreachable!(),
            }
        }
        Ok(())
    }

    fn record_sealed(&mut self, seq: u64, words: &[i128], sealed: &[Sealed]) {
        for (pos, (w, s)) in words.iter().zip(sealed).enumerate() {
            self.truth.sealed.insert((seq, pos), SealedWitness { word: *w, nonce: s.nonce.clone() });
        }
        self.stats.encryptions += sealed.len();
    }

    fn record_composed(&mut self, seq: u64, source: u64, words: &[i128], sealed: &[Sealed], factors: &[u64]) {
        for (pos, ((w, s), f)) in words.iter().zip(sealed).zip(factors).enumerate() {
            self.truth.composed.insert((seq, pos), ComposedWitness { source: (source, pos), word: *w, nonce: s.nonce.clone(), factor: *f });
        }
        self.stats.encryptions += sealed.len();
    }

    /// Agent r encrypts `words` and sends them to l; l combines them with its own
    /// `their_words` (already signed for the phase) and `factors`, and sends the
    /// result to `to`. Returns the combined ciphertexts as received by `to`.
    #[allow(clippy::too_many_arguments)]
    fn round(&mut self, meta: Meta, words: &[i128], their_words: &[i128], own_words_true: &[i128], factors: &[u64], to: Party, kind: &'static str) -> Result<Vec<Ciphertext>> {
        let (r, l) = (meta.r, meta.l);
        let sealed = self.agents[r].encrypt_own(words)?;
        let key_id = self.agents[r].public_key()?.key_id().to_string();
        let cts: Vec<Ciphertext> = sealed.iter().map(|s| s.ciphertext.clone()).collect();
        let seq = self.send(Party::Agent(r), Party::Agent(l), false, meta, Payload::EncryptedBoundary { key_id: key_id.clone(), ciphertexts: hexes(&cts) });
        self.record_sealed(seq, words, &sealed);

        let e = self.net.take(Party::Agent(l), |e| is_kind(e, Party::Agent(r), meta, "encrypted_boundary"))?;
        let incoming = parse(&e.payload, self.agents[l].peer_key(r)?)?;
        let (combined, mine) = self.agents[l].combine(r, &incoming, their_words, factors)?;
        let payload = match kind {
            "encrypted_weighted_diff" => Payload::EncryptedWeightedDiff { key_id, ciphertexts: hexes(&combined) },
            _ => Payload::DualWeightedDiff { key_id, ciphertexts: hexes(&combined) },
        };
        let seq2 = self.send(Party::Agent(l), to, false, meta, payload);
        self.record_composed(seq2, seq, own_words_true, &mine, factors);

        let e = self.net.take(to, |e| is_kind(e, Party::Agent(l), meta, kind))?;
        let key = match to {
            Party::Agent(_) => self.agents[r].public_key()?.clone(),
            Party::Operator => self.agents[l].peer_key(r)?.clone(),
        };
        parse(&e.payload, &key)
    }
}

fn public_from(p: &Payload) -> Result<PaillierPublicKey> {
    match p {
        Payload::PublicKey { key_id, n } => {
            let n = BigUint::parse_bytes(n.as_bytes(), 16).ok_or_else(|| ProtocolError::Malformed("public key modulus".into()))?;
            let pk = PaillierPublicKey::from_modulus(n);
            if pk.key_id() != key_id {
                return Err(ProtocolError::Malformed(format!("key id {key_id} does not match its modulus")));
            }
            Ok(pk)
        }
        other => Err(ProtocolError::Malformed(format!("expected public key, got {}", other.name()))),
    }
}

impl Exchange for ProtocolExchange {
    fn begin_outer(&mut self, t: usize, constants: &[Vec<f64>]) -> admm::Result<()> {
        for r in 0..self.agents.len() {
            self.net.reject_stale(Party::Agent(r), t);
        }
        self.net.reject_stale(Party::Operator, t);
        self.rotate_keys(t)?;
        for (a, c) in self.agents.iter_mut().zip(constants) {
            a.set_constants(c);
        }
        Ok(())
    }

    fn primal_signs(&mut self, t: usize, k: usize, r: usize, values: &[f64]) -> admm::Result<SignReply> {
        let mut signs = vec![0i8; values.len()];
        let mut converged = true;
        for l in self.topo.specs[r].neighbors() {
            let idx = self.topo.entries_with(r, l);
            let kinds = self.topo.kinds_with(r, l);
            let meta = Meta { phase: Phase::Primal, t, k, r, l };
            let words = idx.iter().map(|&e| self.agents[r].word(values[e])).collect::<Result<Vec<_>>>()?;
            let theirs = idx
                .iter()
                .map(|&e| self.agents[l].word(self.agents[l].constant(self.topo.counterpart[r][e])))
                .collect::<Result<Vec<_>>>()?;
            let negated: Vec<i128> = theirs.iter().map(|w| -w).collect();
            let factors = self.agents[l].secrets().primal_factors(r, t, k, &kinds);
            let cts = self.round(meta, &words, &negated, &theirs, &factors, Party::Operator, "encrypted_weighted_diff")?;

            let (s, zero) = self.operator.classify(r, &cts, &self.bound, self.c_max)?;
            self.stats.decryptions += cts.len();
            self.send(Party::Operator, Party::Agent(r), false, meta, Payload::SignMessage { signs: s });
            let e = self.net.take(Party::Agent(r), |e| is_kind(e, Party::Operator, meta, "sign_message"))?;
            let Payload::SignMessage { signs: got } = e.payload else { unreachable!() };
            if got.len() != idx.len() {
                return Err(ProtocolError::Malformed(format!("{} signs for {} entries", got.len(), idx.len())).into());
            }
            for (&e, s) in idx.iter().zip(got) {
                signs[e] = s;
            }
            converged &= zero;
        }
        if converged {
            *self.operator.ledger.entry(r).or_default() += 1;
            let meta = Meta { phase: Phase::Primal, t, k, r, l: r };
            for a in 0..self.agents.len() {
                self.send(Party::Operator, Party::Agent(a), false, meta, Payload::ConvergenceSignal);
            }
            for a in 0..self.agents.len() {
                self.net.take(Party::Agent(a), |e| is_kind(e, Party::Operator, meta, "convergence_signal"))?;
            }
        }
        Ok(SignReply { signs, converged })
    }

    fn dual_increments(&mut self, t: usize, values: &[Vec<f64>]) -> admm::Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = values.iter().map(|v| vec![0.0; v.len()]).collect();
        for r in 0..self.topo.n_regions() {
            for l in self.topo.specs[r].neighbors() {
                let idx = self.topo.entries_with(r, l);
                let kinds = self.topo.kinds_with(r, l);
                let meta = Meta { phase: Phase::Dual, t, k: 0, r, l };
                let mine = idx.iter().map(|&e| self.agents[r].word(values[r][e])).collect::<Result<Vec<_>>>()?;
                let negated: Vec<i128> = mine.iter().map(|w| -w).collect();
                let theirs = idx
                    .iter()
                    .map(|&e| self.agents[l].word(values[l][self.topo.counterpart[r][e]]))
                    .collect::<Result<Vec<_>>>()?;
                let factors = self.agents[l].secrets().dual_factors(r, t, &kinds);
                let cts = self.round(meta, &negated, &theirs, &theirs, &factors, Party::Agent(r), "dual_weighted_diff")?;
                let own = self.agents[r].secrets().dual_factors(l, t, &kinds);
                for (pos, (&e, c)) in idx.iter().zip(&cts).enumerate() {
                    let s = self.agents[r].decrypt_signed(c, &self.bound, || format!("agent{r} from agent{l} at t={t}, entry {pos}"))?;
                    out[r][e] = realize_increment(self.codec.decode_signed(&s), own[pos]);
                }
                self.stats.decryptions += cts.len();
            }
        }
        Ok(out)
    }
}
