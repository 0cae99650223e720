//! Probable-prime generation by trial division followed by Miller-Rabin.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

pub const MILLER_RABIN_ROUNDS: usize = 40;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Miller-Rabin with `rounds` random bases drawn from `rng`.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let upper = n - &one; // bases in [2, n-2]
    'witness: for _ in 0..rounds {
        let a = gen_range(rng, &two, &upper);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

fn gen_range<R: RngCore + ?Sized>(rng: &mut R, lo: &BigUint, hi: &BigUint) -> BigUint {
    // RandBigInt is implemented for sized Rng; go through a small adapter.
    struct Adapter<'a, R: RngCore + ?Sized>(&'a mut R);
    impl<R: RngCore + ?Sized> RngCore for Adapter<'_, R> {
        fn next_u32(&mut self) -> u32 {
            self.0.next_u32()
        }
        fn next_u64(&mut self) -> u64 {
            self.0.next_u64()
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            self.0.fill_bytes(dest)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
            self.0.try_fill_bytes(dest)
        }
    }
    Adapter(rng).gen_biguint_range(lo, hi)
}

/// Uniform integer in `[lo, hi)`.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, lo: &BigUint, hi: &BigUint) -> BigUint {
    gen_range(rng, lo, hi)
}

/// Random probable prime with exactly `bits` bits and the two top bits set,
/// so that the product of two such primes has exactly their summed length.
pub fn random_prime<R: RngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
    max_candidates: usize,
) -> Option<BigUint> {
    if bits < 3 {
        return None;
    }
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    for _ in 0..max_candidates {
        rng.fill_bytes(&mut buf);
        let mut cand = BigUint::from_bytes_be(&buf);
        let excess = nbytes as u64 * 8 - bits;
        cand >>= excess;
        cand.set_bit(bits - 1, true);
        cand.set_bit(bits - 2, true);
        cand.set_bit(0, true);
        if is_probable_prime(&cand, MILLER_RABIN_ROUNDS, rng) {
            return Some(cand);
        }
    }
    None
}

pub(crate) fn is_unit_mod(x: &BigUint, n: &BigUint) -> bool {
    !x.is_zero() && x.gcd(n).is_one()
}
