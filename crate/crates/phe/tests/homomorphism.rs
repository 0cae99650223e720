use std::sync::OnceLock;

use num_bigint::BigUint;
use phe::{keygen, FixedPointCodec, PaillierPrivateKey, PaillierPublicKey};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn key512() -> &'static (PaillierPublicKey, PaillierPrivateKey) {
    static K: OnceLock<(PaillierPublicKey, PaillierPrivateKey)> = OnceLock::new();
    K.get_or_init(|| keygen(512, 2024).unwrap())
}

fn below_n(bytes: Vec<u8>) -> BigUint {
    let (pk, _) = key512();
    BigUint::from_bytes_be(&bytes) % &pk.n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip(bytes in proptest::collection::vec(any::<u8>(), 1..64), seed in any::<u64>()) {
        let (pk, sk) = key512();
        let m = below_n(bytes);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = pk.encrypt_with(&m, &mut rng).unwrap();
        prop_assert_eq!(sk.decrypt(pk, &c).unwrap(), m);
    }

    #[test]
    fn additive(a in proptest::collection::vec(any::<u8>(), 1..64), b in proptest::collection::vec(any::<u8>(), 1..64)) {
        let (pk, sk) = key512();
        let (m1, m2) = (below_n(a), below_n(b));
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let c = pk.add(&pk.encrypt_with(&m1, &mut rng).unwrap(), &pk.encrypt_with(&m2, &mut rng).unwrap()).unwrap();
        prop_assert_eq!(sk.decrypt(pk, &c).unwrap(), (m1 + m2) % &pk.n);
    }

    #[test]
    fn scalar(a in proptest::collection::vec(any::<u8>(), 1..64), k in 1u64..u64::MAX) {
        let (pk, sk) = key512();
        let m = below_n(a);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let c = pk.scale(&pk.encrypt_with(&m, &mut rng).unwrap(), k).unwrap();
        prop_assert_eq!(sk.decrypt(pk, &c).unwrap(), (m * BigUint::from(k)) % &pk.n);
    }

    #[test]
    fn signed_difference_through_ciphertexts(x in -1.0e3f64..1.0e3, y in -1.0e3f64..1.0e3, k in 1u64..40_000) {
        let (pk, sk) = key512();
        let codec = FixedPointCodec::default();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let cx = pk.encrypt_with(&codec.encode_real(x, &pk.n).unwrap(), &mut rng).unwrap();
        let cy = pk.encrypt_with(&codec.encode_real(-y, &pk.n).unwrap(), &mut rng).unwrap();
        let d = pk.scale(&pk.add(&cx, &cy).unwrap(), k).unwrap();
        let got = codec.decode_real(&sk.decrypt(pk, &d).unwrap(), &pk.n);
        let wx = codec.encode_word(x).unwrap();
        let wy = codec.encode_word(y).unwrap();
        let expect = codec.decode_word((wx - wy) * k as i128);
        prop_assert!((got - expect).abs() <= expect.abs() * 1e-15);
    }

    #[test]
    fn codec_error_bound(x in -9.0e8f64..9.0e8) {
        let codec = FixedPointCodec::default();
        let (pk, _) = key512();
        let back = codec.decode_real(&codec.encode_real(x, &pk.n).unwrap(), &pk.n);
        // the spacing of f64 near 9e8 is ~1.2e-7, so compare in fixed-point units
        let w = codec.encode_word(x).unwrap();
        prop_assert_eq!(codec.encode_word(back).unwrap(), w);
        prop_assert!(((w as f64) - x * 1e10).abs() <= 0.5 + (x * 1e10).abs() * 2e-16);
    }
}

#[test]
fn fresh_nonces_give_distinct_ciphertexts() {
    let (pk, sk) = key512();
    let m = BigUint::from(424242u32);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..100 {
        let c = pk.encrypt_with(&m, &mut rng).unwrap();
        assert_eq!(sk.decrypt(pk, &c).unwrap(), m);
        assert!(seen.insert(c.value));
    }
}

#[test]
fn distinct_seeds_distinct_moduli() {
    let a = keygen(256, 1).unwrap().0;
    let b = keygen(256, 2).unwrap().0;
    assert_ne!(a.n, b.n);
}

#[test]
fn key_files_round_trip() {
    let (pk, sk) = key512();
    let dir = tempfile::tempdir().unwrap();
    pk.save(&dir.path().join("pub.json")).unwrap();
    sk.save(&dir.path().join("priv.json")).unwrap();
    assert_eq!(&PaillierPublicKey::load(&dir.path().join("pub.json")).unwrap(), pk);
    assert_eq!(&PaillierPrivateKey::load(&dir.path().join("priv.json")).unwrap(), sk);
    let public_text = std::fs::read_to_string(dir.path().join("pub.json")).unwrap();
    assert!(!public_text.contains(&sk.lambda.to_str_radix(16)));
}
