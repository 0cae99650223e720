use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PheError, Result};
use crate::prime::{is_unit_mod, random_below, random_prime};

const MAX_PRIME_CANDIDATES: usize = 1_000_000;
const MAX_KEYGEN_RETRIES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPublicKey {
    pub n: BigUint,
    pub g: BigUint,
    pub bit_length: u64,
    n_sq: BigUint,
    key_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPrivateKey {
    pub lambda: BigUint,
    pub mu: BigUint,
    key_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub value: BigUint,
    pub key_id: String,
}

fn fingerprint(n: &BigUint) -> String {
    let digest = Sha256::digest(n.to_bytes_be());
    hex::encode(&digest[..8])
}

impl PaillierPublicKey {
    pub fn from_modulus(n: BigUint) -> Self {
        let g = &n + 1u32;
        let n_sq = &n * &n;
        let key_id = fingerprint(&n);
        let bit_length = n.bits();
        PaillierPublicKey {
            n,
            g,
            bit_length,
            n_sq,
            key_id,
        }
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    fn check(&self, c: &Ciphertext) -> Result<()> {
        if c.key_id != self.key_id {
            return Err(PheError::KeyMismatch {
                expected: self.key_id.clone(),
                found: c.key_id.clone(),
            });
        }
        if c.value >= self.n_sq || c.value.is_zero() {
            return Err(PheError::InvalidCiphertext("value outside [1, n^2)".into()));
        }
        Ok(())
    }

    /// c = g^m · r^n mod n². With g = n+1, g^m reduces to 1 + m·n.
    pub fn encrypt(&self, m: &BigUint, r: &BigUint) -> Result<Ciphertext> {
        if *m >= self.n {
            return Err(PheError::Encoding);
        }
        if *r >= self.n || !is_unit_mod(r, &self.n) {
            return Err(PheError::InvalidNonce);
        }
        let gm = (BigUint::one() + m * &self.n) % &self.n_sq;
        let rn = r.modpow(&self.n, &self.n_sq);
        Ok(Ciphertext {
            value: (gm * rn) % &self.n_sq,
            key_id: self.key_id.clone(),
        })
    }

    /// Encrypt with a fresh nonce drawn from `rng`.
    pub fn encrypt_with<R: RngCore + ?Sized>(&self, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
        let r = self.random_nonce(rng);
        self.encrypt(m, &r)
    }

    pub fn random_nonce<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        let one = BigUint::one();
        loop {
            let r = random_below(rng, &one, &self.n);
            if is_unit_mod(&r, &self.n) {
                return r;
            }
        }
    }

    /// E(m1)·E(m2) = E(m1 + m2 mod n).
    pub fn add(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
        self.check(c1)?;
        self.check(c2)?;
        Ok(Ciphertext {
            value: (&c1.value * &c2.value) % &self.n_sq,
            key_id: self.key_id.clone(),
        })
    }

    /// E(m)^k = E(k·m mod n), k ≥ 1.
    pub fn scale(&self, c: &Ciphertext, k: u64) -> Result<Ciphertext> {
        if k == 0 {
            return Err(PheError::ZeroScalar);
        }
        self.check(c)?;
        Ok(Ciphertext {
            value: c.value.modpow(&BigUint::from(k), &self.n_sq),
            key_id: self.key_id.clone(),
        })
    }
}

impl PaillierPrivateKey {
    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    /// m = L(c^λ mod n²)·μ mod n, L(u) = (u−1)/n.
    pub fn decrypt(&self, pk: &PaillierPublicKey, c: &Ciphertext) -> Result<BigUint> {
        if self.key_id != pk.key_id {
            return Err(PheError::KeyMismatch {
                expected: pk.key_id.clone(),
                found: self.key_id.clone(),
            });
        }
        pk.check(c)?;
        let u = c.value.modpow(&self.lambda, &pk.n_sq);
        let (l, rem) = (u - 1u32).div_rem(&pk.n);
        if !rem.is_zero() {
            return Err(PheError::InvalidCiphertext("L(u) is not an integer".into()));
        }
        Ok((l * &self.mu) % &pk.n)
    }
}

/// Build a key pair from two given primes. Used for toy keys in tests.
pub fn keypair_from_primes(p: &BigUint, q: &BigUint) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    if p == q {
        return Err(PheError::Generation("p and q must differ".into()));
    }
    let n = p * q;
    let lambda = (p - 1u32) * (q - 1u32);
    let mu = lambda
        .modinv(&n)
        .ok_or_else(|| PheError::Generation("lambda is not invertible mod n".into()))?;
    let pk = PaillierPublicKey::from_modulus(n);
    let sk = PaillierPrivateKey {
        lambda,
        mu,
        key_id: pk.key_id.clone(),
    };
    Ok((pk, sk))
}

/// Generate a key pair with an n of exactly `bit_length` bits from a seeded RNG.
pub fn keygen(bit_length: u64, rng_seed: u64) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    keygen_with(bit_length, &mut rng)
}

pub fn keygen_with<R: RngCore + ?Sized>(
    bit_length: u64,
    rng: &mut R,
) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    if bit_length < 16 {
        return Err(PheError::Generation(format!(
            "bit length {bit_length} below the minimum of 16"
        )));
    }
    let p_bits = bit_length.div_ceil(2);
    let q_bits = bit_length / 2;
    for _ in 0..MAX_KEYGEN_RETRIES {
        let p = random_prime(p_bits, rng, MAX_PRIME_CANDIDATES)
            .ok_or_else(|| PheError::Generation("no prime found".into()))?;
        let q = random_prime(q_bits, rng, MAX_PRIME_CANDIDATES)
            .ok_or_else(|| PheError::Generation("no prime found".into()))?;
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() != bit_length {
            continue;
        }
        if let Ok(kp) = keypair_from_primes(&p, &q) {
            return Ok(kp);
        }
    }
    Err(PheError::Generation("retries exhausted".into()))
}

#[derive(Serialize, Deserialize)]
struct PublicKeyFile {
    key_id: String,
    bit_length: u64,
    n: String,
    g: String,
}

#[derive(Serialize, Deserialize)]
struct PrivateKeyFile {
    key_id: String,
    lambda: String,
    mu: String,
}

fn to_hex(x: &BigUint) -> String {
    x.to_str_radix(16)
}

fn from_hex(s: &str, field: &str) -> Result<BigUint> {
    BigUint::parse_bytes(s.as_bytes(), 16)
        .ok_or_else(|| PheError::KeyFile(format!("field `{field}` is not hex")))
}

impl PaillierPublicKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PublicKeyFile {
            key_id: self.key_id.clone(),
            bit_length: self.bit_length,
            n: to_hex(&self.n),
            g: to_hex(&self.g),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: PublicKeyFile =
            serde_json::from_str(s).map_err(|e| PheError::KeyFile(e.to_string()))?;
        let pk = PaillierPublicKey::from_modulus(from_hex(&f.n, "n")?);
        if to_hex(&pk.g) != f.g.to_lowercase() {
            return Err(PheError::KeyFile("field `g` must equal n+1".into()));
        }
        if pk.key_id != f.key_id || pk.bit_length != f.bit_length {
            return Err(PheError::KeyFile("key_id or bit_length inconsistent with n".into()));
        }
        Ok(pk)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| PheError::KeyFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| PheError::KeyFile(e.to_string()))?;
        Self::from_json(&s)
    }
}

impl PaillierPrivateKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PrivateKeyFile {
            key_id: self.key_id.clone(),
            lambda: to_hex(&self.lambda),
            mu: to_hex(&self.mu),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: PrivateKeyFile =
            serde_json::from_str(s).map_err(|e| PheError::KeyFile(e.to_string()))?;
        Ok(PaillierPrivateKey {
            lambda: from_hex(&f.lambda, "lambda")?,
            mu: from_hex(&f.mu, "mu")?,
            key_id: f.key_id,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| PheError::KeyFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| PheError::KeyFile(e.to_string()))?;
        Self::from_json(&s)
    }
}

impl Ciphertext {
    /// Big-endian hex of the ciphertext value.
    pub fn to_hex(&self) -> String {
        hex::encode(self.value.to_bytes_be())
    }

    pub fn from_hex(s: &str, key_id: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| PheError::InvalidCiphertext(e.to_string()))?;
        Ok(Ciphertext {
            value: BigUint::from_bytes_be(&bytes),
            key_id: key_id.to_string(),
        })
    }
}

impl Serialize for Ciphertext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Ciphertext", 2)?;
        st.serialize_field("key_id", &self.key_id)?;
        st.serialize_field("value", &self.to_hex())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Ciphertext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            key_id: String,
            value: String,
        }
        let raw = Raw::deserialize(d)?;
        Ciphertext::from_hex(&raw.value, &raw.key_id).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (PaillierPublicKey, PaillierPrivateKey) {
        keypair_from_primes(&BigUint::from(5u32), &BigUint::from(7u32)).unwrap()
    }

    #[test]
    fn toy_key_components() {
        let (pk, sk) = toy();
        assert_eq!(pk.n, BigUint::from(35u32));
        assert_eq!(pk.g, BigUint::from(36u32));
        assert_eq!(sk.lambda, BigUint::from(24u32));
        assert_eq!(sk.mu, BigUint::from(19u32));
        assert_eq!(pk.n_squared(), &BigUint::from(1225u32));
    }

    #[test]
    fn toy_encrypt_zero_with_unit_nonce() {
        let (pk, sk) = toy();
        let c = pk.encrypt(&BigUint::zero(), &BigUint::one()).unwrap();
        assert_eq!(c.value, BigUint::one());
        assert_eq!(sk.decrypt(&pk, &c).unwrap(), BigUint::zero());
    }

    #[test]
    fn toy_encrypt_three_nonce_two() {
        let (pk, _) = toy();
        let c = pk.encrypt(&BigUint::from(3u32), &BigUint::from(2u32)).unwrap();
        // 36^3 mod 1225 = 106, 2^35 mod 1225 = 18, 106*18 mod 1225 = 683
        assert_eq!(c.value, BigUint::from(683u32));
    }

    #[test]
    fn toy_exhaustive_round_trip() {
        let (pk, sk) = toy();
        let nonces: Vec<u32> = (1..35).filter(|r| r % 5 != 0 && r % 7 != 0).collect();
        for m in 0u32..35 {
            for &r in &nonces {
                let c = pk.encrypt(&BigUint::from(m), &BigUint::from(r)).unwrap();
                assert_eq!(sk.decrypt(&pk, &c).unwrap(), BigUint::from(m));
            }
        }
    }

    #[test]
    fn encrypt_rejects_bad_inputs() {
        let (pk, _) = toy();
        assert_eq!(
            pk.encrypt(&BigUint::from(35u32), &BigUint::one()),
            Err(PheError::Encoding)
        );
        assert_eq!(
            pk.encrypt(&BigUint::from(1u32), &BigUint::from(14u32)),
            Err(PheError::InvalidNonce)
        );
        assert_eq!(
            pk.encrypt(&BigUint::from(1u32), &BigUint::zero()),
            Err(PheError::InvalidNonce)
        );
    }

    #[test]
    fn toy_homomorphic_wraps() {
        let (pk, sk) = toy();
        let c1 = pk.encrypt(&BigUint::from(30u32), &BigUint::from(2u32)).unwrap();
        let c2 = pk.encrypt(&BigUint::from(9u32), &BigUint::from(3u32)).unwrap();
        let s = pk.add(&c1, &c2).unwrap();
        assert_eq!(sk.decrypt(&pk, &s).unwrap(), BigUint::from(4u32));
        let k = pk.scale(&c2, 4).unwrap();
        assert_eq!(sk.decrypt(&pk, &k).unwrap(), BigUint::from(1u32));
        assert_eq!(pk.scale(&c2, 0), Err(PheError::ZeroScalar));
    }

    #[test]
    fn key_mismatch_detected() {
        let (pk, sk) = toy();
        let (pk2, sk2) = keypair_from_primes(&BigUint::from(11u32), &BigUint::from(13u32)).unwrap();
        let c = pk.encrypt(&BigUint::from(3u32), &BigUint::from(2u32)).unwrap();
        assert!(matches!(sk2.decrypt(&pk2, &c), Err(PheError::KeyMismatch { .. })));
        assert!(matches!(sk.decrypt(&pk2, &c), Err(PheError::KeyMismatch { .. })));
        let c2 = pk2.encrypt(&BigUint::from(3u32), &BigUint::from(2u32)).unwrap();
        assert!(matches!(pk.add(&c, &c2), Err(PheError::KeyMismatch { .. })));
    }

    #[test]
    fn keygen_bits_and_invariants() {
        for bits in [16u64, 17, 64, 256] {
            let (pk, sk) = keygen(bits, 7).unwrap();
            assert_eq!(pk.n.bits(), bits);
            assert_eq!(pk.g, &pk.n + 1u32);
            assert!(pk.n.bit(0));
            assert!(((&sk.lambda * &sk.mu) % &pk.n).is_one());
        }
        assert!(keygen(15, 0).is_err());
    }

    #[test]
    fn keygen_is_seeded() {
        let a = keygen(128, 11).unwrap().0;
        let b = keygen(128, 11).unwrap().0;
        let c = keygen(128, 12).unwrap().0;
        assert_eq!(a, b);
        assert_ne!(a.n, c.n);
    }

    #[test]
    fn json_round_trip() {
        let (pk, sk) = keygen(128, 3).unwrap();
        assert_eq!(PaillierPublicKey::from_json(&pk.to_json()).unwrap(), pk);
        assert_eq!(PaillierPrivateKey::from_json(&sk.to_json()).unwrap(), sk);
        let c = pk.encrypt(&BigUint::from(77u32), &BigUint::from(5u32)).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: Ciphertext = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(s.contains(&c.to_hex()));
    }
}
