//! Hash-chain key expansion.
//!
//! Expanding a key moves every chain start forward while leaving the
//! private-to-public distance at `2^w1 - 1`, so the expanded private key
//! signs under the expanded public key and neither side reveals the
//! original key.
//!
//! * Model 1 advances every chain by the fixed depth `2^w2 - 1`.
//! * Model 2 advances chain `i` by `e_i`, taken from an [`ExpansionVector`]
//!   derived from a seed both parties know.
//! * The butterfly composition applies two Model-2 expansions in turn
//!   (registration authority, then certificate authority).

use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::hash_suite::chain;
use crate::wots::{ChainParams, KeyRole, KeySequence, MAX_WIDTH};

const VECTOR_MAGIC: &[u8; 7] = b"PQCWCEV";

/// Per-chain expansion counts `e_1 .. e_m`, each in `[0, 2^w2 - 1]`, never
/// all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionVector {
    values: Vec<u32>,
    w2: u8,
    seed_id: Option<[u8; 16]>,
}

impl ExpansionVector {
    pub fn new(values: Vec<u32>, w2: u8) -> Result<Self> {
        check_width(w2)?;
        if values.is_empty() {
            return Err(Error::InvalidParams("expansion vector is empty".into()));
        }
        let max = (1u32 << w2) - 1;
        if let Some(v) = values.iter().find(|&&v| v > max) {
            return Err(Error::InvalidParams(format!(
                "expansion value {v} exceeds 2^{w2} - 1"
            )));
        }
        if values.iter().all(|&v| v == 0) {
            return Err(Error::DegenerateSeed);
        }
        Ok(Self {
            values,
            w2,
            seed_id: None,
        })
    }

    /// The vector that makes Model 2 coincide with Model 1.
    pub fn all_max(m: usize, w2: u8) -> Result<Self> {
        check_width(w2)?;
        Self::new(vec![(1u32 << w2) - 1; m], w2)
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn w2(&self) -> u8 {
        self.w2
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First 16 bytes of `SHA-256(seed)` when derived from a seed.
    pub fn seed_id(&self) -> Option<[u8; 16]> {
        self.seed_id
    }

    /// `"PQCWCEV" || u8 w2 || be16 m || be16 e_i ...`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(VECTOR_MAGIC.len() + 3 + 2 * self.values.len());
        out.extend_from_slice(VECTOR_MAGIC);
        out.push(self.w2);
        out.extend_from_slice(&(self.values.len() as u16).to_be_bytes());
        for &v in &self.values {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let body = bytes
            .strip_prefix(VECTOR_MAGIC.as_slice())
            .ok_or_else(|| Error::InvalidParams("bad expansion vector magic".into()))?;
        if body.len() < 3 {
            return Err(Error::InvalidParams("truncated expansion vector".into()));
        }
        let w2 = body[0];
        let m = u16::from_be_bytes([body[1], body[2]]) as usize;
        let rest = &body[3..];
        if rest.len() != 2 * m {
            return Err(Error::InvalidParams(format!(
                "expansion vector declares {m} values but carries {} bytes",
                rest.len()
            )));
        }
        let values = rest
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect();
        Self::new(values, w2)
    }
}

fn check_width(w2: u8) -> Result<()> {
    if w2 == 0 || w2 > MAX_WIDTH {
        return Err(Error::InvalidParams(format!(
            "w2 must be in 1..=16, got {w2}"
        )));
    }
    Ok(())
}

/// `e_i = be32(SHA-256(seed || be32(i))[..4]) mod 2^w2`.
///
/// Both ends of an expansion run this with the same seed and obtain the same
/// vector. A seed whose vector is all zero is rejected with `DegenerateSeed`.
pub fn derive_expansion_vector(seed: &[u8], m: usize, w2: u8) -> Result<ExpansionVector> {
    if seed.is_empty() {
        return Err(Error::InvalidParams("expansion seed is empty".into()));
    }
    if m == 0 || m > u16::MAX as usize {
        return Err(Error::InvalidParams(format!("invalid element count {m}")));
    }
    check_width(w2)?;
    let mask = (1u32 << w2) - 1;
    let values = (0..m as u32)
        .map(|i| {
            let mut h = Sha256::new();
            h.update(seed);
            h.update(i.to_be_bytes());
            let d = h.finalize();
            u32::from_be_bytes([d[0], d[1], d[2], d[3]]) & mask
        })
        .collect();
    let mut ev = ExpansionVector::new(values, w2)?;
    let id = Sha256::digest(seed);
    let mut seed_id = [0u8; 16];
    seed_id.copy_from_slice(&id[..16]);
    ev.seed_id = Some(seed_id);
    Ok(ev)
}

/// Model 1: `b_i' = f^(2^w2 - 1)(b_i)`.
pub fn expand_public_model1(pk: &KeySequence, params: &ChainParams) -> Result<KeySequence> {
    pk.expect_role(KeyRole::Public)?;
    expand_fixed(pk, params)
}

/// Model 1: `a_i' = f^(2^w2 - 1)(a_i)`.
pub fn expand_private_model1(sk: &KeySequence, params: &ChainParams) -> Result<KeySequence> {
    sk.expect_role(KeyRole::Private)?;
    expand_fixed(sk, params)
}

fn expand_fixed(key: &KeySequence, params: &ChainParams) -> Result<KeySequence> {
    if key.params() != params {
        return Err(Error::ParamsMismatch(
            "key parameters differ from expansion parameters".into(),
        ));
    }
    let depth = params.max_expansion();
    let alg = params.alg();
    Ok(key.map_elements(|_, e| chain(alg, e, depth)))
}

/// Model 2: `b_i'' = f^(e_i)(b_i)`.
pub fn expand_public_model2(pk: &KeySequence, ev: &ExpansionVector) -> Result<KeySequence> {
    pk.expect_role(KeyRole::Public)?;
    expand_by_vector(pk, ev)
}

/// Model 2: `a_i'' = f^(e_i)(a_i)`.
pub fn expand_private_model2(sk: &KeySequence, ev: &ExpansionVector) -> Result<KeySequence> {
    sk.expect_role(KeyRole::Private)?;
    expand_by_vector(sk, ev)
}

fn expand_by_vector(key: &KeySequence, ev: &ExpansionVector) -> Result<KeySequence> {
    let params = key.params();
    if ev.len() != params.m() {
        return Err(Error::ParamsMismatch(format!(
            "expansion vector has {} values, key has {} elements",
            ev.len(),
            params.m()
        )));
    }
    if ev.w2() != params.w2() {
        return Err(Error::ParamsMismatch(format!(
            "expansion vector width {} differs from key w2 {}",
            ev.w2(),
            params.w2()
        )));
    }
    let alg = params.alg();
    Ok(key.map_elements(|i, e| chain(alg, e, ev.values()[i])))
}

/// Two successive Model-2 expansions, first by `ev_ra` then by `ev_ca`.
/// Works on private and public sequences alike; the result equals a single
/// expansion by the elementwise sum of the vectors.
pub fn compose_butterfly(
    base: &KeySequence,
    ev_ra: &ExpansionVector,
    ev_ca: &ExpansionVector,
) -> Result<KeySequence> {
    if ev_ra.len() != ev_ca.len() || ev_ra.w2() != ev_ca.w2() {
        return Err(Error::ParamsMismatch(
            "butterfly expansion vectors differ in shape".into(),
        ));
    }
    let cocoon = expand_by_vector(base, ev_ra)?;
    expand_by_vector(&cocoon, ev_ca)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash_suite::{hash, list_algorithms, HashAlgId};
    use crate::wots::{generate_keypair, sign, verify};
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn loop_hash(alg: HashAlgId, x: &[u8], k: u32) -> Vec<u8> {
        let mut v = x.to_vec();
        for _ in 0..k {
            v = hash(alg, &v).into_bytes();
        }
        v
    }

    /// Hash-and-truncate oracle written against the byte layout directly.
    fn oracle_vector(seed: &[u8], m: usize, w2: u8) -> Vec<u32> {
        (0..m)
            .map(|i| {
                let mut input = seed.to_vec();
                input.extend_from_slice(&[
                    (i >> 24) as u8,
                    (i >> 16) as u8,
                    (i >> 8) as u8,
                    i as u8,
                ]);
                let d = hash(HashAlgId::Sha256, &input).into_bytes();
                let word = ((d[0] as u64) << 24)
                    | ((d[1] as u64) << 16)
                    | ((d[2] as u64) << 8)
                    | d[3] as u64;
                (word % (1u64 << w2)) as u32
            })
            .collect()
    }

    fn keys(alg: HashAlgId, w1: u8, w2: u8, seed: u8) -> (ChainParams, KeySequence, KeySequence) {
        let p = ChainParams::new(alg, w1, w2).unwrap();
        let (sk, pk) = generate_keypair(&[seed; 32], &p).unwrap();
        (p, sk, pk)
    }

    #[test]
    fn vector_derivation_matches_oracle() {
        let seed = b"fixed expansion test seed";
        let ev = derive_expansion_vector(seed, 32, 8).unwrap();
        assert_eq!(ev.values(), oracle_vector(seed, 32, 8).as_slice());
        assert_eq!(ev, derive_expansion_vector(seed, 32, 8).unwrap());
        assert!(ev.seed_id().is_some());
    }

    #[test]
    fn vector_values_in_range() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let w2 = rng.gen_range(1..=16u8);
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            match derive_expansion_vector(&seed, 32, w2) {
                Ok(ev) => assert!(ev.values().iter().all(|&v| v < (1 << w2))),
                Err(e) => assert_eq!(e, Error::DegenerateSeed),
            }
        }
    }

    #[test]
    fn degenerate_seed_rejected() {
        // With w2 = 1 and m = 1 roughly half of all seeds give a zero vector.
        let degenerate = (0u32..64)
            .map(|i| derive_expansion_vector(&i.to_be_bytes(), 1, 1))
            .filter(|r| *r == Err(Error::DegenerateSeed))
            .count();
        assert!(degenerate > 0);
        assert_eq!(
            ExpansionVector::new(vec![0; 32], 8),
            Err(Error::DegenerateSeed)
        );
    }

    #[test]
    fn vector_argument_errors() {
        assert!(matches!(
            derive_expansion_vector(b"", 4, 8),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            derive_expansion_vector(b"s", 4, 0),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            derive_expansion_vector(b"s", 4, 17),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            ExpansionVector::new(vec![256], 8),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn vector_codec() {
        let ev = derive_expansion_vector(b"codec", 16, 16).unwrap();
        let bytes = ev.to_bytes();
        assert_eq!(&bytes[..7], b"PQCWCEV");
        assert_eq!(bytes[7], 16);
        assert_eq!(&bytes[8..10], &[0, 16]);
        let back = ExpansionVector::from_bytes(&bytes).unwrap();
        assert_eq!(back.values(), ev.values());
        assert!(ExpansionVector::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(ExpansionVector::from_bytes(b"PQCWCXX").is_err());
    }

    #[test]
    fn model1_single_hash_for_w2_1() {
        let (p, sk, pk) = keys(HashAlgId::Sha256, 8, 1, 1);
        let b1 = expand_public_model1(&pk, &p).unwrap();
        let a1 = expand_private_model1(&sk, &p).unwrap();
        for i in 0..p.m() {
            assert_eq!(
                b1.elements()[i],
                hash(HashAlgId::Sha256, &pk.elements()[i]).into_bytes()
            );
            assert_eq!(
                a1.elements()[i],
                hash(HashAlgId::Sha256, &sk.elements()[i]).into_bytes()
            );
        }
    }

    #[test]
    fn model1_matches_loop_and_preserves_distance() {
        let (p, sk, pk) = keys(HashAlgId::Sha512, 8, 8, 2);
        let b1 = expand_public_model1(&pk, &p).unwrap();
        let a1 = expand_private_model1(&sk, &p).unwrap();
        assert_eq!(a1.role(), KeyRole::Private);
        for i in 0..p.m() {
            assert_eq!(
                b1.elements()[i],
                loop_hash(HashAlgId::Sha512, &pk.elements()[i], 255)
            );
            assert_eq!(
                chain(HashAlgId::Sha512, &a1.elements()[i], 255),
                b1.elements()[i]
            );
        }
        let sig = sign(&a1, b"after model 1", &p).unwrap();
        assert!(verify(&b1, b"after model 1", &sig, &p).unwrap());
        assert!(!verify(&pk, b"after model 1", &sig, &p).unwrap());
    }

    #[test]
    fn model1_is_model2_special_case() {
        for alg in list_algorithms() {
            let (p, sk, pk) = keys(alg, 8, 4, 7);
            let all_max = ExpansionVector::all_max(p.m(), p.w2()).unwrap();
            assert_eq!(
                expand_public_model1(&pk, &p).unwrap(),
                expand_public_model2(&pk, &all_max).unwrap()
            );
            assert_eq!(
                expand_private_model1(&sk, &p).unwrap(),
                expand_private_model2(&sk, &all_max).unwrap()
            );
        }
    }

    #[test]
    fn model2_zero_entries_are_identity() {
        let (p, _, pk) = keys(HashAlgId::Sha3_256, 8, 8, 4);
        let mut values = vec![0u32; p.m()];
        values[3] = 9;
        let ev = ExpansionVector::new(values, 8).unwrap();
        let b2 = expand_public_model2(&pk, &ev).unwrap();
        for i in 0..p.m() {
            if i == 3 {
                assert_eq!(
                    b2.elements()[i],
                    loop_hash(HashAlgId::Sha3_256, &pk.elements()[i], 9)
                );
            } else {
                assert_eq!(b2.elements()[i], pk.elements()[i]);
            }
        }
    }

    #[test]
    fn model2_matches_loop_and_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (p, sk, pk) = keys(HashAlgId::Blake2_256, 8, 8, 6);
        let ev = derive_expansion_vector(b"model 2", p.m(), 8).unwrap();
        let b2 = expand_public_model2(&pk, &ev).unwrap();
        let a2 = expand_private_model2(&sk, &ev).unwrap();
        for i in 0..p.m() {
            let e = ev.values()[i];
            assert_eq!(
                b2.elements()[i],
                loop_hash(HashAlgId::Blake2_256, &pk.elements()[i], e)
            );
            assert_eq!(
                chain(HashAlgId::Blake2_256, &a2.elements()[i], 255),
                b2.elements()[i]
            );
        }
        for _ in 0..20 {
            let msg: [u8; 16] = rng.gen();
            let sig = sign(&a2, &msg, &p).unwrap();
            assert!(verify(&b2, &msg, &sig, &p).unwrap());
        }
    }

    #[test]
    fn model2_shape_errors() {
        let (p, sk, pk) = keys(HashAlgId::Sha256, 16, 8, 8);
        let wrong_len = derive_expansion_vector(b"x", 32, 8).unwrap();
        assert!(matches!(
            expand_public_model2(&pk, &wrong_len),
            Err(Error::ParamsMismatch(_))
        ));
        let wrong_w2 = derive_expansion_vector(b"x", p.m(), 4).unwrap();
        assert!(matches!(
            expand_private_model2(&sk, &wrong_w2),
            Err(Error::ParamsMismatch(_))
        ));
        assert!(matches!(
            expand_public_model1(&sk, &p),
            Err(Error::WrongKeyRole { .. })
        ));
        assert!(matches!(
            expand_private_model1(&pk, &p),
            Err(Error::WrongKeyRole { .. })
        ));
    }

    #[test]
    fn butterfly_is_additive_and_commutative() {
        let (p, sk, pk) = keys(HashAlgId::Sha224, 8, 8, 10);
        let ra = derive_expansion_vector(b"ra", p.m(), 8).unwrap();
        let ca = derive_expansion_vector(b"ca", p.m(), 8).unwrap();
        let b = compose_butterfly(&pk, &ra, &ca).unwrap();
        let a = compose_butterfly(&sk, &ra, &ca).unwrap();
        assert_eq!(b, compose_butterfly(&pk, &ca, &ra).unwrap());
        for i in 0..p.m() {
            let total = ra.values()[i] + ca.values()[i];
            assert_eq!(
                b.elements()[i],
                loop_hash(HashAlgId::Sha224, &pk.elements()[i], total)
            );
            assert_eq!(
                chain(HashAlgId::Sha224, &a.elements()[i], 255),
                b.elements()[i]
            );
        }
        let sig = sign(&a, b"butterfly", &p).unwrap();
        assert!(verify(&b, b"butterfly", &sig, &p).unwrap());

        let mismatched = derive_expansion_vector(b"ca", p.m(), 4).unwrap();
        assert!(compose_butterfly(&pk, &ra, &mismatched).is_err());
    }

    #[test]
    fn expanded_keys_differ_from_originals() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for alg in list_algorithms() {
            let p = ChainParams::new(alg, 8, 4).unwrap();
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            let (_, pk) = generate_keypair(&seed, &p).unwrap();
            let ev = derive_expansion_vector(&seed, p.m(), 4).unwrap();
            let m1 = expand_public_model1(&pk, &p).unwrap();
            let m2 = expand_public_model2(&pk, &ev).unwrap();
            for expanded in [&m1, &m2] {
                assert_ne!(expanded.fingerprint(), pk.fingerprint());
            }
            assert!(m1.elements().iter().zip(pk.elements()).all(|(x, y)| x != y));
            for (i, (x, y)) in m2.elements().iter().zip(pk.elements()).enumerate() {
                assert_eq!(x == y, ev.values()[i] == 0);
            }
        }
    }
}
