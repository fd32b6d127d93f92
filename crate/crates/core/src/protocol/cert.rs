//! Anonymous certificates, their subject data and the issuing identity.
//!
//! Encoding is a strict TLV sequence in this order:
//!
//! | tag  | field                                      |
//! |------|--------------------------------------------|
//! | 0x01 | version (u8)                               |
//! | 0x02 | hash algorithm index (u8)                  |
//! | 0x03 | w1 (u8)                                    |
//! | 0x04 | w2 (u8)                                    |
//! | 0x05 | expanded public key, key-file encoding     |
//! | 0x06 | SHA-256 of the concatenated key elements   |
//! | 0x07 | subject id (utf-8, omitted under butterfly issuance) |
//! | 0x08 | permission grant (nested)                  |
//! | 0x09 | issuer id                                  |
//! | 0x0A | issuer signature                           |
//!
//! The issuer signs every field before 0x0A with a one-time WOTS key.

use std::collections::HashMap;

use sha2::{Digest as _, Sha256};

use super::tlv::{TlvReader, TlvWriter};
use crate::error::{Error, Result};
use crate::hash_suite::HashAlgId;
use crate::keyfile;
use crate::wots::{self, ChainParams, KeyRole, KeySequence};

pub const CERT_VERSION: u8 = 1;

const TAG_VERSION: u8 = 0x01;
const TAG_ALG: u8 = 0x02;
const TAG_W1: u8 = 0x03;
const TAG_W2: u8 = 0x04;
const TAG_PUBLIC_KEY: u8 = 0x05;
const TAG_COMPRESSED: u8 = 0x06;
const TAG_SUBJECT_ID: u8 = 0x07;
const TAG_GRANT: u8 = 0x08;
const TAG_ISSUER_ID: u8 = 0x09;
const TAG_ISSUER_SIG: u8 = 0x0A;

const TAG_PERMISSION: u8 = 0x21;
const TAG_NOT_BEFORE: u8 = 0x22;
const TAG_NOT_AFTER: u8 = 0x23;

/// Permissions and validity requested for a certificate (`J`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionGrant {
    permissions: Vec<String>,
    not_before: u64,
    not_after: u64,
}

impl PermissionGrant {
    pub fn new(permissions: Vec<String>, not_before: u64, not_after: u64) -> Result<Self> {
        if permissions.is_empty() {
            return Err(Error::InvalidParams("permission list is empty".into()));
        }
        if not_before >= not_after {
            return Err(Error::InvalidParams(format!(
                "validity window {not_before}..{not_after} is empty"
            )));
        }
        Ok(Self {
            permissions,
            not_before,
            not_after,
        })
    }

    pub fn permissions(&self) -> &[String] {
        &self.permissions
    }

    pub fn not_before(&self) -> u64 {
        self.not_before
    }

    pub fn not_after(&self) -> u64 {
        self.not_after
    }

    pub(crate) fn write(&self, w: &mut TlvWriter) {
        for p in &self.permissions {
            w.put_str(TAG_PERMISSION, p);
        }
        w.put_u64(TAG_NOT_BEFORE, self.not_before)
            .put_u64(TAG_NOT_AFTER, self.not_after);
    }

    pub(crate) fn read(r: &mut TlvReader<'_>) -> Result<Self> {
        let permissions = r
            .repeated(TAG_PERMISSION)?
            .into_iter()
            .map(|p| r.utf8(p))
            .collect::<Result<Vec<_>>>()?;
        let not_before = r.expect_u64(TAG_NOT_BEFORE)?;
        let not_after = r.expect_u64(TAG_NOT_AFTER)?;
        Self::new(permissions, not_before, not_after).map_err(|e| r.error(e.to_string()))
    }
}

/// Everything the end entity asks to have certified (`I`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectInfo {
    pub subject_id: String,
    pub grant: PermissionGrant,
}

impl SubjectInfo {
    pub fn new(subject_id: impl Into<String>, grant: PermissionGrant) -> Self {
        Self {
            subject_id: subject_id.into(),
            grant,
        }
    }

    /// The part of `I` forwarded to the certificate authority under
    /// butterfly issuance. The subject id stays with the RA.
    pub fn grant(&self) -> &PermissionGrant {
        &self.grant
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnonymousCertificate {
    pub version: u8,
    pub public_key: KeySequence,
    pub subject_id: Option<String>,
    pub grant: PermissionGrant,
    pub issuer_id: Vec<u8>,
    pub issuer_signature: Vec<u8>,
}

impl AnonymousCertificate {
    pub fn params(&self) -> &ChainParams {
        self.public_key.params()
    }

    pub fn compressed_key(&self) -> [u8; 32] {
        self.public_key.fingerprint()
    }

    fn write_tbs(&self, w: &mut TlvWriter) {
        let p = self.public_key.params();
        w.put_u8(TAG_VERSION, self.version)
            .put_u8(TAG_ALG, p.alg().index())
            .put_u8(TAG_W1, p.w1())
            .put_u8(TAG_W2, p.w2())
            .put(
                TAG_PUBLIC_KEY,
                &keyfile::encode_key(&self.public_key, false),
            )
            .put(TAG_COMPRESSED, &self.compressed_key());
        if let Some(id) = &self.subject_id {
            w.put_str(TAG_SUBJECT_ID, id);
        }
        w.nested(TAG_GRANT, |n| self.grant.write(n))
            .put(TAG_ISSUER_ID, &self.issuer_id);
    }

    /// The bytes covered by the issuer signature.
    pub fn to_be_signed(&self) -> Vec<u8> {
        let mut w = TlvWriter::new();
        self.write_tbs(&mut w);
        w.finish()
    }
}

pub fn encode_certificate(cert: &AnonymousCertificate) -> Vec<u8> {
    let mut w = TlvWriter::new();
    cert.write_tbs(&mut w);
    w.put(TAG_ISSUER_SIG, &cert.issuer_signature);
    w.finish()
}

pub fn decode_certificate(bytes: &[u8]) -> Result<AnonymousCertificate> {
    let mut r = TlvReader::new(bytes, Error::MalformedCertificate);
    let version = r.expect_u8(TAG_VERSION)?;
    if version != CERT_VERSION {
        return Err(r.error(format!("unsupported version {version}")));
    }
    let alg = HashAlgId::from_index(r.expect_u8(TAG_ALG)?).map_err(|e| r.error(e.to_string()))?;
    let w1 = r.expect_u8(TAG_W1)?;
    let w2 = r.expect_u8(TAG_W2)?;
    let params = ChainParams::new(alg, w1, w2).map_err(|e| r.error(e.to_string()))?;
    let (public_key, _) =
        keyfile::decode_key(r.expect(TAG_PUBLIC_KEY)?).map_err(|e| r.error(e.to_string()))?;
    if public_key.role() != KeyRole::Public {
        return Err(r.error("certificate key is not a public key"));
    }
    if *public_key.params() != params {
        return Err(r.error("key parameters disagree with certificate header"));
    }
    let compressed = r.expect(TAG_COMPRESSED)?;
    if compressed != public_key.fingerprint() {
        return Err(r.error("compressed key does not match key elements"));
    }
    let subject_id = r.optional(TAG_SUBJECT_ID)?.map(|v| r.utf8(v)).transpose()?;
    let grant_bytes = r.expect(TAG_GRANT)?;
    let mut gr = r.nested(grant_bytes);
    let grant = PermissionGrant::read(&mut gr)?;
    gr.finish()?;
    let issuer_id = r.expect(TAG_ISSUER_ID)?.to_vec();
    let issuer_signature = r.expect(TAG_ISSUER_SIG)?.to_vec();
    r.finish()?;
    Ok(AnonymousCertificate {
        version,
        public_key,
        subject_id,
        grant,
        issuer_id,
        issuer_signature,
    })
}

/// The certificate authority's signing identity.
///
/// Every certificate is signed with a fresh one-time WOTS key derived from
/// the root seed and a serial number. The issuer id is the compressed
/// one-time public key; relying parties look it up in the issuer directory.
#[derive(Debug, Clone)]
pub struct IssuerIdentity {
    name: String,
    root_seed: [u8; 32],
    params: ChainParams,
    next_serial: u64,
    directory: HashMap<[u8; 32], KeySequence>,
}

impl IssuerIdentity {
    pub fn new(name: impl Into<String>, root_seed: [u8; 32]) -> Self {
        Self {
            name: name.into(),
            root_seed,
            params: ChainParams::new(HashAlgId::Sha256, 8, 1).expect("static params"),
            next_serial: 0,
            directory: HashMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn issued_count(&self) -> u64 {
        self.next_serial
    }

    /// Fills `issuer_id` and `issuer_signature`.
    pub fn sign(&mut self, cert: &mut AnonymousCertificate) -> Result<()> {
        let serial = self.next_serial;
        self.next_serial += 1;
        let seed: [u8; 32] = Sha256::new()
            .chain_update(self.root_seed)
            .chain_update(b"issuer one-time key")
            .chain_update(serial.to_be_bytes())
            .finalize()
            .into();
        let (sk, pk) = wots::generate_keypair(&seed, &self.params)?;
        let id = wots::compress_public_key(&pk)?;
        cert.issuer_id = id.to_vec();
        let sig = wots::sign(&sk, &cert.to_be_signed(), &self.params)?;
        cert.issuer_signature = keyfile::encode_signature(&sig);
        self.directory.insert(id, pk);
        Ok(())
    }

    pub fn issuer_key(&self, issuer_id: &[u8]) -> Option<&KeySequence> {
        let id: [u8; 32] = issuer_id.try_into().ok()?;
        self.directory.get(&id)
    }

    /// `Ok(false)` for an unknown issuer id or an issuer signature that fails to
    /// parse or verify.
    pub fn verify(&self, cert: &AnonymousCertificate) -> Result<bool> {
        let Some(pk) = self.issuer_key(&cert.issuer_id) else {
            return Ok(false);
        };
        let Ok(sig) = keyfile::decode_signature(&cert.issuer_signature) else {
            return Ok(false);
        };
        match wots::verify(pk, &cert.to_be_signed(), &sig, &self.params) {
            Ok(ok) => Ok(ok),
            Err(Error::MalformedSignature(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Decodes and checks the issuer signature. A certificate that parses
    /// but does not verify is `CertificateRejected`.
    pub fn decode_verified(&self, bytes: &[u8]) -> Result<AnonymousCertificate> {
        let cert = decode_certificate(bytes)?;
        if !self.verify(&cert)? {
            return Err(Error::CertificateRejected(format!(
                "issuer {} did not sign this certificate",
                self.name
            )));
        }
        Ok(cert)
    }
}
