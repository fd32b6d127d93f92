//! Checksum-free Winternitz one-time signatures.
//!
//! A 256-bit message digest `D` is cut into `m = 256 / w1` big-endian chunks
//! `d_i`. The private key is `m` chain starts `a_i`; the public key is
//! `b_i = f^(2^w1 - 1)(a_i)`. Signing reveals `s_i = f^(d_i)(a_i)` and
//! verification checks `f^(2^w1 - 1 - d_i)(s_i) == b_i`.
//!
//! # Security note
//!
//! There is no checksum chain. Anyone holding a signature on `D` can forge a
//! signature on any `D'` whose chunks are all `>=` those of `D` by hashing
//! forward. A chunk `d_i = 0` reveals the raw chain start `a_i`. Every key
//! must sign at most one message.

use sha2::{Digest as _, Sha256};
use subtle::ConstantTimeEq;

use crate::error::{Error, Result};
use crate::hash_suite::{chain, HashAlgId};

/// Bit length of the signed digest `D`.
pub const MESSAGE_DIGEST_BITS: usize = 256;
/// Byte length of a freshly derived private element `a_i`.
pub const PRIVATE_ELEMENT_LEN: usize = 32;
/// Largest supported chunk / expansion width in bits.
pub const MAX_WIDTH: u8 = 16;

/// Parameters shared by every chain computation of one key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainParams {
    alg: HashAlgId,
    w1: u8,
    w2: u8,
}

impl ChainParams {
    pub fn new(alg: HashAlgId, w1: u8, w2: u8) -> Result<Self> {
        if w1 == 0 || w1 > MAX_WIDTH {
            return Err(Error::InvalidParams(format!(
                "w1 must be in 1..=16, got {w1}"
            )));
        }
        if !MESSAGE_DIGEST_BITS.is_multiple_of(w1 as usize) {
            return Err(Error::InvalidParams(format!(
                "w1 = {w1} does not divide the {MESSAGE_DIGEST_BITS}-bit digest"
            )));
        }
        if w2 == 0 || w2 > MAX_WIDTH {
            return Err(Error::InvalidParams(format!(
                "w2 must be in 1..=16, got {w2}"
            )));
        }
        Ok(Self { alg, w1, w2 })
    }

    pub fn alg(&self) -> HashAlgId {
        self.alg
    }

    pub fn w1(&self) -> u8 {
        self.w1
    }

    pub fn w2(&self) -> u8 {
        self.w2
    }

    /// Number of chains, `L_D / w1`.
    pub fn m(&self) -> usize {
        MESSAGE_DIGEST_BITS / self.w1 as usize
    }

    /// Chain length between private and public element, `2^w1 - 1`.
    pub fn max_digit(&self) -> u32 {
        (1u32 << self.w1) - 1
    }

    /// Fixed Model-1 expansion depth, `2^w2 - 1`.
    pub fn max_expansion(&self) -> u32 {
        (1u32 << self.w2) - 1
    }

    /// Nominal signature length in bits, `m * digest_bits`.
    pub fn signature_bits(&self) -> usize {
        self.m() * self.alg.digest_bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyRole {
    Private,
    Public,
}

impl KeyRole {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyRole::Private => "private",
            KeyRole::Public => "public",
        }
    }
}

/// `m` chain positions forming a private key (`A`, `A'`, `A''`) or a public
/// key (`B`, `B'`, `B''`).
///
/// Private elements are 32 bytes when freshly derived and digest-length once
/// expanded; an element whose expansion count was zero keeps its original
/// length. Public elements are always digest-length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeySequence {
    role: KeyRole,
    elements: Vec<Vec<u8>>,
    params: ChainParams,
}

impl KeySequence {
    pub fn new(role: KeyRole, elements: Vec<Vec<u8>>, params: ChainParams) -> Result<Self> {
        if elements.len() != params.m() {
            return Err(Error::MalformedKey(format!(
                "expected {} elements, got {}",
                params.m(),
                elements.len()
            )));
        }
        let digest_len = params.alg.digest_len();
        for (i, e) in elements.iter().enumerate() {
            let ok = match role {
                KeyRole::Private => e.len() == PRIVATE_ELEMENT_LEN || e.len() == digest_len,
                KeyRole::Public => e.len() == digest_len,
            };
            if !ok {
                return Err(Error::MalformedKey(format!(
                    "{} element {i} has invalid length {}",
                    role.as_str(),
                    e.len()
                )));
            }
        }
        Ok(Self {
            role,
            elements,
            params,
        })
    }

    pub fn role(&self) -> KeyRole {
        self.role
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn elements(&self) -> &[Vec<u8>] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Vec<u8>> {
        self.elements
    }

    /// SHA-256 over the concatenated elements, regardless of role.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for e in &self.elements {
            h.update(e);
        }
        h.finalize().into()
    }

    pub(crate) fn expect_role(&self, role: KeyRole) -> Result<()> {
        if self.role != role {
            return Err(Error::WrongKeyRole {
                expected: role.as_str(),
                found: self.role.as_str(),
            });
        }
        Ok(())
    }

    /// Replaces every element through `step`, keeping role and params.
    pub(crate) fn map_elements<F>(&self, mut step: F) -> Self
    where
        F: FnMut(usize, &[u8]) -> Vec<u8>,
    {
        Self {
            role: self.role,
            elements: self
                .elements
                .iter()
                .enumerate()
                .map(|(i, e)| step(i, e))
                .collect(),
            params: self.params,
        }
    }
}

/// `S = {s_1, ..., s_m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    elements: Vec<Vec<u8>>,
    params: ChainParams,
}

impl Signature {
    /// Accepts any element count; shape problems surface from [`verify`].
    pub fn from_parts(elements: Vec<Vec<u8>>, params: ChainParams) -> Self {
        Self { elements, params }
    }

    pub fn elements(&self) -> &[Vec<u8>] {
        &self.elements
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn into_elements(self) -> Vec<Vec<u8>> {
        self.elements
    }
}

/// The chunks `d_1 .. d_m` of the signed digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageElements(Vec<u32>);

impl MessageElements {
    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

/// `a_i = SHA-256(seed || be32(i))`, independent of the chain hash.
pub fn derive_private_key(seed: &[u8], params: &ChainParams) -> Result<KeySequence> {
    if seed.len() != 32 {
        return Err(Error::InvalidSeed(seed.len()));
    }
    let elements = (0..params.m() as u32)
        .map(|i| {
            let mut h = Sha256::new();
            h.update(seed);
            h.update(i.to_be_bytes());
            h.finalize().to_vec()
        })
        .collect();
    KeySequence::new(KeyRole::Private, elements, *params)
}

pub fn generate_keypair(seed: &[u8], params: &ChainParams) -> Result<(KeySequence, KeySequence)> {
    let sk = derive_private_key(seed, params)?;
    let pk = public_from_private(&sk)?;
    Ok((sk, pk))
}

/// Walks every private chain to its end: `b_i = f^(2^w1 - 1)(a_i)`.
pub fn public_from_private(sk: &KeySequence) -> Result<KeySequence> {
    sk.expect_role(KeyRole::Private)?;
    let params = sk.params;
    let depth = params.max_digit();
    let elements = sk
        .elements
        .iter()
        .map(|a| chain(params.alg, a, depth))
        .collect();
    KeySequence::new(KeyRole::Public, elements, params)
}

/// Pre-hashes `message` with SHA-256 and chunks the digest.
pub fn digest_to_elements(message: &[u8], params: &ChainParams) -> MessageElements {
    let digest: [u8; 32] = Sha256::digest(message).into();
    split_digest(&digest, params)
}

/// Splits a 256-bit digest into `m` big-endian `w1`-bit chunks, most
/// significant first.
pub fn split_digest(digest: &[u8; 32], params: &ChainParams) -> MessageElements {
    let w1 = params.w1 as u32;
    let mask = params.max_digit();
    let mut out = Vec::with_capacity(params.m());
    let mut acc: u32 = 0;
    let mut bits: u32 = 0;
    for &byte in digest {
        acc = (acc << 8) | byte as u32;
        bits += 8;
        while bits >= w1 {
            bits -= w1;
            out.push((acc >> bits) & mask);
        }
        acc &= (1u32 << bits) - 1;
    }
    MessageElements(out)
}

pub fn sign(sk: &KeySequence, message: &[u8], params: &ChainParams) -> Result<Signature> {
    let digest: [u8; 32] = Sha256::digest(message).into();
    sign_digest(sk, &digest, params)
}

/// Signs a caller-supplied 256-bit digest without pre-hashing.
pub fn sign_digest(sk: &KeySequence, digest: &[u8; 32], params: &ChainParams) -> Result<Signature> {
    sk.expect_role(KeyRole::Private)?;
    if sk.params != *params {
        return Err(Error::ParamsMismatch(
            "private key parameters differ from signing parameters".into(),
        ));
    }
    let d = split_digest(digest, params);
    let elements = sk
        .elements
        .iter()
        .zip(d.values())
        .map(|(a, &di)| chain(params.alg, a, di))
        .collect();
    Ok(Signature {
        elements,
        params: *params,
    })
}

pub fn verify(
    pk: &KeySequence,
    message: &[u8],
    sig: &Signature,
    params: &ChainParams,
) -> Result<bool> {
    let digest: [u8; 32] = Sha256::digest(message).into();
    verify_digest(pk, &digest, sig, params)
}

/// Returns `Ok(false)` for a well-formed signature that does not verify and
/// `Err(MalformedSignature)` when its shape cannot match `params`.
pub fn verify_digest(
    pk: &KeySequence,
    digest: &[u8; 32],
    sig: &Signature,
    params: &ChainParams,
) -> Result<bool> {
    pk.expect_role(KeyRole::Public)?;
    if pk.params != *params {
        return Err(Error::ParamsMismatch(
            "public key parameters differ from verification parameters".into(),
        ));
    }
    if sig.params.alg != params.alg || sig.params.w1 != params.w1 {
        return Err(Error::MalformedSignature(format!(
            "signature made with {}/w1={}, expected {}/w1={}",
            sig.params.alg, sig.params.w1, params.alg, params.w1
        )));
    }
    if sig.elements.len() != params.m() {
        return Err(Error::MalformedSignature(format!(
            "expected {} elements, got {}",
            params.m(),
            sig.elements.len()
        )));
    }
    let digest_len = params.alg.digest_len();
    if let Some(bad) = sig
        .elements
        .iter()
        .position(|s| s.len() != digest_len && s.len() != PRIVATE_ELEMENT_LEN)
    {
        return Err(Error::MalformedSignature(format!(
            "element {bad} has invalid length {}",
            sig.elements[bad].len()
        )));
    }
    let d = split_digest(digest, params);
    let max = params.max_digit();
    let mut ok = subtle::Choice::from(1u8);
    for ((s, b), &di) in sig.elements.iter().zip(&pk.elements).zip(d.values()) {
        let v = chain(params.alg, s, max - di);
        ok &= v.as_slice().ct_eq(b.as_slice());
    }
    Ok(bool::from(ok))
}

/// Single SHA-256 over `b_1 || ... || b_m`.
pub fn compress_public_key(pk: &KeySequence) -> Result<[u8; 32]> {
    pk.expect_role(KeyRole::Public)?;
    Ok(pk.fingerprint())
}
