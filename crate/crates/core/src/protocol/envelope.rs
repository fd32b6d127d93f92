//! Symmetric keys, authenticated envelopes and the time-period seed.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::{Aes128, Aes256};
use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes128Gcm, Aes256Gcm, Nonce};
use rand_core::CryptoRngCore;

use crate::error::{Error, Result};

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

/// AES key held by the end entity and one authority (`q3`, `q_RA`, `q_CA`).
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey(Vec<u8>);

impl SymmetricKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match bytes.len() {
            16 | 32 => Ok(Self(bytes.to_vec())),
            n => Err(Error::InvalidParams(format!(
                "symmetric key must be 16 or 32 bytes, got {n}"
            ))),
        }
    }

    /// Fresh 256-bit key.
    pub fn generate<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = vec![0u8; 32];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymmetricKey({} bytes)", self.0.len())
    }
}

/// Epoch index `l` shared by the end entity and the registration authority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimePeriod(pub u64);

/// AES-GCM ciphertext with its nonce. The tag is the last 16 bytes of
/// `ciphertext`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBox {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

impl SealedBox {
    /// `nonce || ciphertext || tag`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + self.ciphertext.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(Error::MalformedMessage(format!(
                "sealed box of {} bytes is shorter than nonce and tag",
                bytes.len()
            )));
        }
        let mut nonce = [0u8; NONCE_LEN];
        nonce.copy_from_slice(&bytes[..NONCE_LEN]);
        Ok(Self {
            nonce,
            ciphertext: bytes[NONCE_LEN..].to_vec(),
        })
    }
}

/// Encrypts under `key` with a fresh random nonce; `aad` is authenticated
/// but not stored.
pub fn seal<R: CryptoRngCore + ?Sized>(
    key: &SymmetricKey,
    aad: &[u8],
    plaintext: &[u8],
    rng: &mut R,
) -> SealedBox {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let payload = Payload {
        msg: plaintext,
        aad,
    };
    let n = Nonce::from_slice(&nonce);
    let ciphertext = match key.0.len() {
        16 => Aes128Gcm::new_from_slice(&key.0)
            .expect("16-byte key")
            .encrypt(n, payload),
        _ => Aes256Gcm::new_from_slice(&key.0)
            .expect("32-byte key")
            .encrypt(n, payload),
    }
    .expect("AES-GCM encryption cannot fail for in-memory buffers");
    SealedBox { nonce, ciphertext }
}

pub fn open(key: &SymmetricKey, aad: &[u8], sealed: &SealedBox) -> Result<Vec<u8>> {
    let payload = Payload {
        msg: &sealed.ciphertext,
        aad,
    };
    let n = Nonce::from_slice(&sealed.nonce);
    match key.0.len() {
        16 => Aes128Gcm::new_from_slice(&key.0)
            .expect("16-byte key")
            .decrypt(n, payload),
        _ => Aes256Gcm::new_from_slice(&key.0)
            .expect("32-byte key")
            .decrypt(n, payload),
    }
    .map_err(|_| Error::TamperDetected)
}

/// `r_RA = AES_{q_RA}(be128(l))`: one raw block encryption.
pub fn derive_ra_seed(q_ra: &SymmetricKey, l: TimePeriod) -> [u8; 16] {
    let mut block = (l.0 as u128).to_be_bytes().into();
    match q_ra.0.len() {
        16 => Aes128::new_from_slice(&q_ra.0)
            .expect("16-byte key")
            .encrypt_block(&mut block),
        _ => Aes256::new_from_slice(&q_ra.0)
            .expect("32-byte key")
            .encrypt_block(&mut block),
    }
    block.into()
}
