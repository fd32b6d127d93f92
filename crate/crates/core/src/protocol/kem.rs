//! Key-encapsulation boundary used to transport symmetric keys to the
//! registration and certificate authorities.
//!
//! Any post-quantum KEM (ML-KEM in deployments) plugs in by implementing
//! [`Kem`]. The crate ships only [`InsecureTestKem`], a deterministic
//! stand-in for exercising the protocol.

use rand_core::CryptoRngCore;
use sha2::{Digest as _, Sha256};

use super::envelope::{open, seal, SealedBox, SymmetricKey};
use super::tlv::{TlvReader, TlvWriter};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KemPublicKey(pub Vec<u8>);

#[derive(Clone, PartialEq, Eq)]
pub struct KemSecretKey(pub Vec<u8>);

impl std::fmt::Debug for KemSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KemSecretKey({} bytes)", self.0.len())
    }
}

#[derive(Debug, Clone)]
pub struct KemKeyPair {
    pub public: KemPublicKey,
    pub secret: KemSecretKey,
}

#[derive(Debug, Clone)]
pub struct Encapsulation {
    pub ciphertext: Vec<u8>,
    pub shared_secret: [u8; 32],
}

/// `decapsulate(sk, encapsulate(pk).ciphertext) == encapsulate(pk).shared_secret`.
pub trait Kem: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate_keypair(&self, rng: &mut dyn CryptoRngCore) -> KemKeyPair;
    fn encapsulate(
        &self,
        public: &KemPublicKey,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Encapsulation>;
    fn decapsulate(&self, secret: &KemSecretKey, ciphertext: &[u8]) -> Result<[u8; 32]>;
}

/// NOT SECURE. Protocol-testing KEM with no hardness assumption.
///
/// The public key is `SHA-256(tag || secret)`, the ciphertext is a random
/// 32-byte sender nonce and the shared secret is `SHA-256(tag || public ||
/// nonce)`. Anyone holding the public key can recompute the shared secret.
#[derive(Debug, Clone, Copy, Default)]
pub struct InsecureTestKem;

const TEST_KEM_PUBLIC: &[u8] = b"pqcwc insecure test kem/public";
const TEST_KEM_SHARED: &[u8] = b"pqcwc insecure test kem/shared";

impl InsecureTestKem {
    fn public_from_secret(secret: &[u8]) -> Vec<u8> {
        Sha256::new()
            .chain_update(TEST_KEM_PUBLIC)
            .chain_update(secret)
            .finalize()
            .to_vec()
    }

    fn shared(public: &[u8], nonce: &[u8]) -> [u8; 32] {
        Sha256::new()
            .chain_update(TEST_KEM_SHARED)
            .chain_update(public)
            .chain_update(nonce)
            .finalize()
            .into()
    }
}

impl Kem for InsecureTestKem {
    fn name(&self) -> &'static str {
        "insecure-test-kem"
    }

    fn generate_keypair(&self, rng: &mut dyn CryptoRngCore) -> KemKeyPair {
        let mut secret = vec![0u8; 32];
        rng.fill_bytes(&mut secret);
        KemKeyPair {
            public: KemPublicKey(Self::public_from_secret(&secret)),
            secret: KemSecretKey(secret),
        }
    }

    fn encapsulate(
        &self,
        public: &KemPublicKey,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Encapsulation> {
        if public.0.len() != 32 {
            return Err(Error::KemError(format!(
                "public key must be 32 bytes, got {}",
                public.0.len()
            )));
        }
        let mut nonce = vec![0u8; 32];
        rng.fill_bytes(&mut nonce);
        let shared_secret = Self::shared(&public.0, &nonce);
        Ok(Encapsulation {
            ciphertext: nonce,
            shared_secret,
        })
    }

    fn decapsulate(&self, secret: &KemSecretKey, ciphertext: &[u8]) -> Result<[u8; 32]> {
        if secret.0.len() != 32 {
            return Err(Error::KemError("secret key must be 32 bytes".into()));
        }
        if ciphertext.len() != 32 {
            return Err(Error::KemError(format!(
                "ciphertext must be 32 bytes, got {}",
                ciphertext.len()
            )));
        }
        let public = Self::public_from_secret(&secret.0);
        Ok(Self::shared(&public, ciphertext))
    }
}

/// A symmetric key sealed to a KEM recipient (`q3'`, `q_RA'`, `q_CA'`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEnvelope {
    pub kem_ciphertext: Vec<u8>,
    pub sealed_key: SealedBox,
}

const TAG_KEM_CT: u8 = 0x01;
const TAG_SEALED_KEY: u8 = 0x02;

impl KeyEnvelope {
    /// Encapsulates to `recipient` and wraps `key` under the shared secret.
    /// `context` is bound as associated data.
    pub fn seal(
        kem: &dyn Kem,
        recipient: &KemPublicKey,
        key: &SymmetricKey,
        context: &[u8],
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Self> {
        let enc = kem.encapsulate(recipient, rng)?;
        let wrap = SymmetricKey::from_bytes(&enc.shared_secret)?;
        let sealed_key = seal(&wrap, context, key.as_bytes(), rng);
        Ok(Self {
            kem_ciphertext: enc.ciphertext,
            sealed_key,
        })
    }

    pub fn open(
        &self,
        kem: &dyn Kem,
        secret: &KemSecretKey,
        context: &[u8],
    ) -> Result<SymmetricKey> {
        let shared = kem.decapsulate(secret, &self.kem_ciphertext)?;
        let wrap = SymmetricKey::from_bytes(&shared)?;
        let key = open(&wrap, context, &self.sealed_key)?;
        SymmetricKey::from_bytes(&key).map_err(|_| Error::TamperDetected)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = TlvWriter::new();
        w.put(TAG_KEM_CT, &self.kem_ciphertext)
            .put(TAG_SEALED_KEY, &self.sealed_key.to_bytes());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = TlvReader::new(bytes, Error::MalformedMessage);
        let kem_ciphertext = r.expect(TAG_KEM_CT)?.to_vec();
        let sealed_key = SealedBox::from_bytes(r.expect(TAG_SEALED_KEY)?)?;
        r.finish()?;
        Ok(Self {
            kem_ciphertext,
            sealed_key,
        })
    }
}
