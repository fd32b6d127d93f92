//! The twelve benchmark hash functions behind one interface, plus the
//! iterated chain function `f^k` every other module is built on.
//!
//! The chain function is a bare hash: the first application consumes the raw
//! input bytes and every later application consumes the previous full digest.
//! No address, index or salt is mixed in.

use std::fmt;
use std::str::FromStr;

use blake2::digest::consts::{U32, U48, U64};
use blake2::Blake2b;
use sha2::Digest as _;

use crate::error::{Error, Result};

/// Largest digest produced by any supported algorithm, in bytes.
pub const MAX_DIGEST_LEN: usize = 64;

/// Hash algorithm identifier. Discriminants are the on-disk algorithm index
/// and follow the row order of the signature-length tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum HashAlgId {
    Sha1 = 0,
    Sha224 = 1,
    Sha256 = 2,
    Sha384 = 3,
    Sha512 = 4,
    Sha3_224 = 5,
    Sha3_256 = 6,
    Sha3_384 = 7,
    Sha3_512 = 8,
    Blake2_256 = 9,
    Blake2_384 = 10,
    Blake2_512 = 11,
}

const ALL: [HashAlgId; 12] = [
    HashAlgId::Sha1,
    HashAlgId::Sha224,
    HashAlgId::Sha256,
    HashAlgId::Sha384,
    HashAlgId::Sha512,
    HashAlgId::Sha3_224,
    HashAlgId::Sha3_256,
    HashAlgId::Sha3_384,
    HashAlgId::Sha3_512,
    HashAlgId::Blake2_256,
    HashAlgId::Blake2_384,
    HashAlgId::Blake2_512,
];

/// All supported algorithms in table order (SHA-1 first, BLAKE2-512 last).
pub fn list_algorithms() -> Vec<HashAlgId> {
    ALL.to_vec()
}

impl HashAlgId {
    /// Canonical display name, e.g. `"SHA3-256"`.
    pub fn name(self) -> &'static str {
        match self {
            HashAlgId::Sha1 => "SHA-1",
            HashAlgId::Sha224 => "SHA-224",
            HashAlgId::Sha256 => "SHA-256",
            HashAlgId::Sha384 => "SHA-384",
            HashAlgId::Sha512 => "SHA-512",
            HashAlgId::Sha3_224 => "SHA3-224",
            HashAlgId::Sha3_256 => "SHA3-256",
            HashAlgId::Sha3_384 => "SHA3-384",
            HashAlgId::Sha3_512 => "SHA3-512",
            HashAlgId::Blake2_256 => "BLAKE2-256",
            HashAlgId::Blake2_384 => "BLAKE2-384",
            HashAlgId::Blake2_512 => "BLAKE2-512",
        }
    }

    pub fn digest_bits(self) -> usize {
        match self {
            HashAlgId::Sha1 => 160,
            HashAlgId::Sha224 | HashAlgId::Sha3_224 => 224,
            HashAlgId::Sha256 | HashAlgId::Sha3_256 | HashAlgId::Blake2_256 => 256,
            HashAlgId::Sha384 | HashAlgId::Sha3_384 | HashAlgId::Blake2_384 => 384,
            HashAlgId::Sha512 | HashAlgId::Sha3_512 | HashAlgId::Blake2_512 => 512,
        }
    }

    pub fn digest_len(self) -> usize {
        self.digest_bits() / 8
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Result<Self> {
        ALL.get(index as usize)
            .copied()
            .ok_or_else(|| Error::UnsupportedAlgorithm(format!("index {index}")))
    }

    /// SHA-1 is benchmarked for comparison only.
    pub fn is_deprecated(self) -> bool {
        self == HashAlgId::Sha1
    }

    /// Hashes `input` into `out`, which must be exactly `digest_len()` bytes.
    pub fn hash_into(self, input: &[u8], out: &mut [u8]) {
        match self {
            HashAlgId::Sha1 => out.copy_from_slice(&sha1::Sha1::digest(input)),
            HashAlgId::Sha224 => out.copy_from_slice(&sha2::Sha224::digest(input)),
            HashAlgId::Sha256 => out.copy_from_slice(&sha2::Sha256::digest(input)),
            HashAlgId::Sha384 => out.copy_from_slice(&sha2::Sha384::digest(input)),
            HashAlgId::Sha512 => out.copy_from_slice(&sha2::Sha512::digest(input)),
            HashAlgId::Sha3_224 => out.copy_from_slice(&sha3::Sha3_224::digest(input)),
            HashAlgId::Sha3_256 => out.copy_from_slice(&sha3::Sha3_256::digest(input)),
            HashAlgId::Sha3_384 => out.copy_from_slice(&sha3::Sha3_384::digest(input)),
            HashAlgId::Sha3_512 => out.copy_from_slice(&sha3::Sha3_512::digest(input)),
            HashAlgId::Blake2_256 => out.copy_from_slice(&Blake2b::<U32>::digest(input)),
            HashAlgId::Blake2_384 => out.copy_from_slice(&Blake2b::<U48>::digest(input)),
            HashAlgId::Blake2_512 => out.copy_from_slice(&Blake2b::<U64>::digest(input)),
        }
    }
}

impl fmt::Display for HashAlgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashAlgId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .copied()
            .find(|alg| alg.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnsupportedAlgorithm(s.to_string()))
    }
}

/// Output of a single hash invocation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digest(Vec<u8>);

impl Digest {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn bit_len(&self) -> usize {
        self.0.len() * 8
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

pub fn hash(alg: HashAlgId, input: &[u8]) -> Digest {
    let mut out = vec![0u8; alg.digest_len()];
    alg.hash_into(input, &mut out);
    Digest(out)
}

/// `f^k(x)`: applies the hash `k` times. `k = 0` returns `x` unchanged.
pub fn chain(alg: HashAlgId, x: &[u8], k: u32) -> Vec<u8> {
    chain_with(
        |input, out| alg.hash_into(input, out),
        alg.digest_len(),
        x,
        k,
    )
}

/// Chain driver over an arbitrary compression closure producing `out_len`
/// bytes per call. Invokes `hash` exactly `k` times.
pub(crate) fn chain_with<H>(mut hash: H, out_len: usize, x: &[u8], k: u32) -> Vec<u8>
where
    H: FnMut(&[u8], &mut [u8]),
{
    if k == 0 {
        return x.to_vec();
    }
    let mut cur = [0u8; MAX_DIGEST_LEN];
    let mut next = [0u8; MAX_DIGEST_LEN];
    hash(x, &mut cur[..out_len]);
    for _ in 1..k {
        hash(&cur[..out_len], &mut next[..out_len]);
        std::mem::swap(&mut cur, &mut next);
    }
    cur[..out_len].to_vec()
}
