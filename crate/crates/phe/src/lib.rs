//! Paillier public-key encryption with additive homomorphism, plus a
//! fixed-point codec for carrying signed reals through the plaintext ring.

pub mod codec;
pub mod error;
pub mod key;
pub mod prime;

pub use codec::{ring_to_signed, word_to_ring, FixedPointCodec, DEFAULT_SCALE, DEFAULT_WORD_BITS};
pub use error::{PheError, Result};
pub use key::{keygen, keygen_with, keypair_from_primes, Ciphertext, PaillierPrivateKey, PaillierPublicKey};

/// Default modulus length for production runs.
pub const DEFAULT_KEY_BITS: u64 = 1024;

pub fn encrypt(pk: &PaillierPublicKey, m: &num_bigint::BigUint, r: &num_bigint::BigUint) -> Result<Ciphertext> {
    pk.encrypt(m, r)
}

pub fn decrypt(sk: &PaillierPrivateKey, pk: &PaillierPublicKey, c: &Ciphertext) -> Result<num_bigint::BigUint> {
    sk.decrypt(pk, c)
}

pub fn homomorphic_add(pk: &PaillierPublicKey, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    pk.add(c1, c2)
}

pub fn homomorphic_scale(pk: &PaillierPublicKey, c: &Ciphertext, k: u64) -> Result<Ciphertext> {
    pk.scale(c, k)
}
