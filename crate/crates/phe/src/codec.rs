//! Fixed-point mapping between reals and the Paillier plaintext ring Z_n.
//!
//! A real x becomes the signed word round(x·scale) (half away from zero).
//! Negative words are stored as n − |w|, so homomorphic differences decode
//! with the right sign as long as magnitudes stay below n/2.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::error::{PheError, Result};

pub const DEFAULT_SCALE: u64 = 10_000_000_000;
pub const DEFAULT_WORD_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointCodec {
    pub scale: u64,
    pub word_bits: u32,
}

impl Default for FixedPointCodec {
    fn default() -> Self {
        FixedPointCodec {
            scale: DEFAULT_SCALE,
            word_bits: DEFAULT_WORD_BITS,
        }
    }
}

impl FixedPointCodec {
    pub fn new(scale: u64, word_bits: u32) -> Self {
        assert!(scale > 0, "scale must be positive");
        assert!((2..=128).contains(&word_bits), "word_bits out of range");
        FixedPointCodec { scale, word_bits }
    }

    pub fn quantum(&self) -> f64 {
        1.0 / self.scale as f64
    }

    /// Largest representable magnitude of a real value.
    pub fn max_abs(&self) -> f64 {
        2f64.powi(self.word_bits as i32 - 1) / self.scale as f64
    }

    /// Signed fixed-point word for `x`.
    pub fn encode_word(&self, x: f64) -> Result<i128> {
        let v = (x * self.scale as f64).round();
        let limit = 2f64.powi(self.word_bits as i32 - 1);
        if !v.is_finite() || v.abs() >= limit {
            return Err(PheError::Range {
                value: x,
                scale: self.scale,
                word_bits: self.word_bits,
            });
        }
        Ok(v as i128)
    }

    pub fn decode_word(&self, w: i128) -> f64 {
        w as f64 / self.scale as f64
    }

    /// Encode into Z_n with ring-complement negatives.
    pub fn encode_real(&self, x: f64, n: &BigUint) -> Result<BigUint> {
        let w = self.encode_word(x)?;
        Ok(word_to_ring(w, n))
    }

    pub fn decode_real(&self, z: &BigUint, n: &BigUint) -> f64 {
        self.decode_signed(&ring_to_signed(z, n))
    }

    /// Real value of a signed fixed-point integer of any width.
    pub fn decode_signed(&self, s: &BigInt) -> f64 {
        // split to keep precision for large magnitudes
        let scale = BigInt::from(self.scale);
        let (q, r) = (s / &scale, s % &scale);
        q.to_f64().unwrap_or(f64::NAN) + r.to_f64().unwrap_or(0.0) / self.scale as f64
    }
}

pub fn word_to_ring(w: i128, n: &BigUint) -> BigUint {
    let mag = BigUint::from(w.unsigned_abs());
    if w < 0 {
        (n - (mag % n)) % n
    } else {
        mag % n
    }
}

/// Map z ∈ Z_n to the signed representative in (−n/2, n/2].
pub fn ring_to_signed(z: &BigUint, n: &BigUint) -> BigInt {
    let z = z % n;
    let half = n >> 1u32;
    if z > half {
        BigInt::from_biguint(Sign::Minus, n - &z)
    } else if z.is_zero() {
        BigInt::zero()
    } else {
        BigInt::from_biguint(Sign::Plus, z)
    }
}
