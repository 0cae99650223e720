use std::collections::BTreeMap;

use admm::{classify_weighted, PenaltySecrets};
use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use phe::{keygen_with, ring_to_signed, word_to_ring, Ciphertext, FixedPointCodec, PaillierPrivateKey, PaillierPublicKey};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{ProtocolError, Result};

/// One encryption as performed: the ciphertext and the nonce behind it.
#[derive(Clone, Debug)]
pub struct Sealed {
    pub ciphertext: Ciphertext,
    pub nonce: BigUint,
}

/// Largest magnitude a decoded weighted difference may have: two words apart, times one factor.
pub fn difference_bound(codec: &FixedPointCodec, c_max: u64) -> BigInt {
    BigInt::from(c_max) << codec.word_bits
}

/// Static overflow check: max|difference|·c_max must stay below n/2 for every key of `key_bits` bits.
pub fn check_capacity(key_bits: u64, codec: &FixedPointCodec, c_max: u64) -> Result<()> {
    // n ≥ 2^(bits−1), so n/2 ≥ 2^(bits−2)
    let bound = difference_bound(codec, c_max);
    if bound.bits() + 1 >= key_bits.saturating_sub(1) {
        return Err(ProtocolError::DecodeOverflow {
            context: format!("{key_bits}-bit key with {}-bit words and factors up to {c_max}", codec.word_bits),
            value: bound.to_string(),
        });
    }
    Ok(())
}

fn check_decoded(s: &BigInt, bound: &BigInt, context: impl FnOnce() -> String) -> Result<()> {
    if s.abs() > *bound {
        return Err(ProtocolError::DecodeOverflow { context: context(), value: s.to_string() });
    }
    Ok(())
}

/// An agent: its rotating key pair, the public keys of its neighbours, its
/// penalty secrets and the constants X^r_l(t), Z^r_l(t) it serves from.
#[derive(Debug)]
pub struct AgentEndpoint {
    pub region: usize,
    secrets: PenaltySecrets,
    codec: FixedPointCodec,
    key_bits: u64,
    keys: Option<(PaillierPublicKey, PaillierPrivateKey)>,
    peer_keys: BTreeMap<usize, PaillierPublicKey>,
    constants: Vec<f64>,
    nonce_rng: ChaCha20Rng,
}

impl AgentEndpoint {
    pub fn new(secrets: PenaltySecrets, codec: FixedPointCodec, key_bits: u64) -> Self {
        let nonce_rng = ChaCha20Rng::from_seed(secrets.stream_seed(b"nonce", 0));
        AgentEndpoint {
            region: secrets.region,
            secrets,
            codec,
            key_bits,
            keys: None,
            peer_keys: BTreeMap::new(),
            constants: Vec::new(),
            nonce_rng,
        }
    }

    pub fn secrets(&self) -> &PenaltySecrets {
        &self.secrets
    }

    /// Fresh key pair and nonce stream for outer iteration t.
    pub fn rotate(&mut self, t: usize) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
        let mut rng = ChaCha20Rng::from_seed(self.secrets.stream_seed(b"keys", t));
        let pair = keygen_with(self.key_bits, &mut rng)?;
        self.nonce_rng = ChaCha20Rng::from_seed(self.secrets.stream_seed(b"nonce", t));
        self.peer_keys.clear();
        self.keys = Some(pair.clone());
        Ok(pair)
    }

    pub fn public_key(&self) -> Result<&PaillierPublicKey> {
        self.keys.as_ref().map(|k| &k.0).ok_or_else(|| ProtocolError::UnknownKey(format!("agent{} own key", self.region)))
    }

    pub fn learn_key(&mut self, owner: usize, pk: PaillierPublicKey) {
        self.peer_keys.insert(owner, pk);
    }

    pub fn peer_key(&self, owner: usize) -> Result<&PaillierPublicKey> {
        self.peer_keys.get(&owner).ok_or_else(|| ProtocolError::UnknownKey(format!("agent{owner} at agent{}", self.region)))
    }

    pub fn set_constants(&mut self, values: &[f64]) {
        self.constants = values.to_vec();
    }

    pub fn constant(&self, e: usize) -> f64 {
        self.constants[e]
    }

    pub fn word(&self, x: f64) -> Result<i128> {
        Ok(self.codec.encode_word(x)?)
    }

    fn seal(&mut self, pk: &PaillierPublicKey, w: i128) -> Result<Sealed> {
        let nonce = pk.random_nonce(&mut self.nonce_rng);
        let ciphertext = pk.encrypt(&word_to_ring(w, &pk.n), &nonce)?;
        Ok(Sealed { ciphertext, nonce })
    }

    /// E_r(w) under the agent's own key for each word.
    pub fn encrypt_own(&mut self, words: &[i128]) -> Result<Vec<Sealed>> {
        let pk = self.public_key()?.clone();
        words.iter().map(|&w| self.seal(&pk, w)).collect()
    }

    /// (incoming · E_r(w))^factor under r's public key, entry by entry. Returns the
    /// resulting ciphertexts and the encryptions of the agent's own words.
    pub fn combine(&mut self, owner: usize, incoming: &[Ciphertext], words: &[i128], factors: &[u64]) -> Result<(Vec<Ciphertext>, Vec<Sealed>)> {
        if incoming.len() != words.len() || words.len() != factors.len() {
            return Err(ProtocolError::Malformed(format!("{} ciphertexts for {} entries", incoming.len(), words.len())));
        }
        let pk = self.peer_key(owner)?.clone();
        let mut out = Vec::with_capacity(words.len());
        let mut sealed = Vec::with_capacity(words.len());
        for ((c, &w), &f) in incoming.iter().zip(words).zip(factors) {
            let mine = self.seal(&pk, w)?;
            out.push(pk.scale(&pk.add(c, &mine.ciphertext)?, f)?);
            sealed.push(mine);
        }
        Ok((out, sealed))
    }

    /// Signed integer under the agent's own key, checked against the difference bound.
    pub fn decrypt_signed(&self, c: &Ciphertext, bound: &BigInt, context: impl FnOnce() -> String) -> Result<BigInt> {
        let (pk, sk) = self.keys.as_ref().ok_or_else(|| ProtocolError::UnknownKey(format!("agent{} own key", self.region)))?;
        let s = ring_to_signed(&sk.decrypt(pk, c)?, &pk.n);
        check_decoded(&s, bound, context)?;
        Ok(s)
    }
}

/// The system operator: holds each agent's private key for the current outer
/// iteration, decrypts weighted differences and answers with signs only.
#[derive(Debug, Default)]
pub struct OperatorEndpoint {
    keys: BTreeMap<usize, (Option<PaillierPublicKey>, Option<PaillierPrivateKey>)>,
    /// convergence signals issued per region
    pub ledger: BTreeMap<usize, usize>,
}

impl OperatorEndpoint {
    pub fn clear_keys(&mut self) {
        self.keys.clear();
    }

    pub fn learn_public(&mut self, r: usize, pk: PaillierPublicKey) {
        self.keys.entry(r).or_default().0 = Some(pk);
    }

    pub fn learn_private(&mut self, r: usize, sk: PaillierPrivateKey) {
        self.keys.entry(r).or_default().1 = Some(sk);
    }

    pub fn key_id(&self, r: usize) -> Option<&str> {
        self.keys.get(&r).and_then(|k| k.0.as_ref()).map(|pk| pk.key_id())
    }

    /// Signs of decrypted weighted differences and whether all of them are zero.
    pub fn classify(&self, r: usize, cts: &[Ciphertext], bound: &BigInt, c_max: u64) -> Result<(Vec<i8>, bool)> {
        let (pk, sk) = match self.keys.get(&r) {
            Some((Some(pk), Some(sk))) => (pk, sk),
            _ => return Err(ProtocolError::UnknownKey(format!("agent{r} at operator"))),
        };
        let mut signs = Vec::with_capacity(cts.len());
        let mut zero = true;
        for (pos, c) in cts.iter().enumerate() {
            let s = ring_to_signed(&sk.decrypt(pk, c)?, &pk.n);
            check_decoded(&s, bound, || format!("operator, region {r}, entry {pos}"))?;
            let w = i128::try_from(s).expect("bounded by the difference bound");
            let (sign, z) = classify_weighted(w, c_max);
            signs.push(sign);
            zero &= z;
        }
        Ok((signs, zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(r: usize) -> AgentEndpoint {
        let mut a = AgentEndpoint::new(PenaltySecrets::new(5, r, (100, 200)), FixedPointCodec::default(), 256);
        a.rotate(0).unwrap();
        a
    }

    #[test]
    fn capacity_bound() {
        let codec = FixedPointCodec::default();
        assert!(check_capacity(512, &codec, 200).is_ok());
        assert!(check_capacity(64, &codec, 200).is_err());
        assert!(check_capacity(128, &FixedPointCodec::new(10_000_000_000, 120), 200).is_err());
    }

    #[test]
    fn rotation_is_reproducible_and_fresh() {
        let mut a = agent(0);
        let k0 = a.public_key().unwrap().clone();
        let k1 = a.rotate(1).unwrap().0;
        assert_ne!(k0, k1);
        assert_eq!(a.rotate(0).unwrap().0, k0);
    }

    #[test]
    fn weighted_difference_through_two_agents() {
        // r holds 0.5, l holds 0.25; with factor 150 the operator sees 150·0.25·scale > 0
        let mut r = agent(0);
        let mut l = agent(1);
        l.learn_key(0, r.public_key().unwrap().clone());
        let wr = r.word(0.5).unwrap();
        let wl = l.word(0.25).unwrap();
        let sent = r.encrypt_own(&[wr]).unwrap();
        let (out, _) = l.combine(0, &[sent[0].ciphertext.clone()], &[-wl], &[150]).unwrap();
        let bound = difference_bound(&FixedPointCodec::default(), 200);
        let s = r.decrypt_signed(&out[0], &bound, String::new).unwrap();
        assert_eq!(s, BigInt::from(150i128 * (wr - wl)));
    }

    #[test]
    fn foreign_ciphertext_is_a_key_mismatch() {
        let mut r = agent(0);
        let mut l = agent(1);
        l.learn_key(0, r.public_key().unwrap().clone());
        let wrong = l.encrypt_own(&[7]).unwrap();
        assert!(matches!(l.combine(0, &[wrong[0].ciphertext.clone()], &[1], &[100]), Err(ProtocolError::Crypto(_))));
        let _ = r.encrypt_own(&[1]).unwrap();
    }

    #[test]
    fn operator_needs_both_keys() {
        let r = agent(0);
        let mut op = OperatorEndpoint::default();
        op.learn_public(0, r.public_key().unwrap().clone());
        let bound = difference_bound(&FixedPointCodec::default(), 200);
        assert!(op.classify(0, &[], &bound, 200).is_err());
    }
}
