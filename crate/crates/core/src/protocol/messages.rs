//! Wire messages exchanged between the end entity, the registration
//! authority and the certificate authority.
//!
//! Frame: `"PQCWCMSG" | u8 type | be32 body length | TLV body`.
//!
//! The body always ends with a checksum TLV (tag 0x3F) holding SHA-256 over
//! the type byte and every body byte before it, so corruption in transit
//! surfaces as a decode error rather than a silently altered field.

use sha2::{Digest as _, Sha256};

use super::cert::{
    decode_certificate, encode_certificate, AnonymousCertificate, PermissionGrant, SubjectInfo,
};
use super::envelope::SealedBox;
use super::kem::KeyEnvelope;
use super::tlv::{TlvReader, TlvWriter};
use crate::error::{Error, Result};
use crate::keyfile;
use crate::wots::{KeyRole, KeySequence};

pub const FRAME_MAGIC: &[u8; 8] = b"PQCWCMSG";
const FRAME_HEADER_LEN: usize = FRAME_MAGIC.len() + 1 + 4;

const TAG_PUBLIC_KEY: u8 = 0x30;
const TAG_SUBJECT: u8 = 0x31;
const TAG_KEY_ENVELOPE: u8 = 0x32;
const TAG_SECOND_KEY_ENVELOPE: u8 = 0x33;
const TAG_CERTIFICATE: u8 = 0x34;
const TAG_SEALED: u8 = 0x35;
const TAG_GRANT: u8 = 0x36;
const TAG_CHECKSUM: u8 = 0x3F;
const CHECKSUM_TLV_LEN: usize = 1 + 4 + 32;

const TAG_SUBJECT_ID: u8 = 0x01;
const TAG_SUBJECT_GRANT: u8 = 0x02;

/// EE to CA, Model 1: caterpillar key `B` and subject info `I` in clear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertRequestM1 {
    pub public_key: KeySequence,
    pub subject: SubjectInfo,
}

/// CA to EE, Model 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaResponseM1 {
    pub certificate: AnonymousCertificate,
}

/// EE to CA, Model 2: `B`, `q3'` and `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertRequestM2 {
    pub public_key: KeySequence,
    pub sealed_q3: KeyEnvelope,
    pub subject: SubjectInfo,
}

/// CA to EE, Model 2: the certificate and `r4` sealed under `q3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaResponseM2 {
    pub certificate: AnonymousCertificate,
    pub sealed_r4: SealedBox,
}

/// EE to RA: caterpillar key `B`, `q_RA'`, `q_CA'` and `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BkeRequest {
    pub public_key: KeySequence,
    pub sealed_q_ra: KeyEnvelope,
    pub sealed_q_ca: KeyEnvelope,
    pub subject: SubjectInfo,
}

/// RA to CA: cocoon key `B'`, grant `J` and the untouched `q_CA'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaToCaRequest {
    pub cocoon_key: KeySequence,
    pub grant: PermissionGrant,
    pub sealed_q_ca: KeyEnvelope,
}

/// CA to RA, forwarded verbatim to the EE: `Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BkeResponse {
    pub sealed: SealedBox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    CertRequestM1(CertRequestM1),
    CaResponseM1(CaResponseM1),
    CertRequestM2(CertRequestM2),
    CaResponseM2(CaResponseM2),
    BkeRequest(BkeRequest),
    RaToCaRequest(RaToCaRequest),
    BkeResponse(BkeResponse),
}

impl Message {
    pub fn type_code(&self) -> u8 {
        match self {
            Message::CertRequestM1(_) => 1,
            Message::CaResponseM1(_) => 2,
            Message::CertRequestM2(_) => 3,
            Message::CaResponseM2(_) => 4,
            Message::BkeRequest(_) => 5,
            Message::RaToCaRequest(_) => 6,
            Message::BkeResponse(_) => 7,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = TlvWriter::new();
        match self {
            Message::CertRequestM1(m) => {
                put_key(&mut w, &m.public_key);
                put_subject(&mut w, &m.subject);
            }
            Message::CaResponseM1(m) => {
                w.put(TAG_CERTIFICATE, &encode_certificate(&m.certificate));
            }
            Message::CertRequestM2(m) => {
                put_key(&mut w, &m.public_key);
                w.put(TAG_KEY_ENVELOPE, &m.sealed_q3.to_bytes());
                put_subject(&mut w, &m.subject);
            }
            Message::CaResponseM2(m) => {
                w.put(TAG_CERTIFICATE, &encode_certificate(&m.certificate))
                    .put(TAG_SEALED, &m.sealed_r4.to_bytes());
            }
            Message::BkeRequest(m) => {
                put_key(&mut w, &m.public_key);
                w.put(TAG_KEY_ENVELOPE, &m.sealed_q_ra.to_bytes())
                    .put(TAG_SECOND_KEY_ENVELOPE, &m.sealed_q_ca.to_bytes());
                put_subject(&mut w, &m.subject);
            }
            Message::RaToCaRequest(m) => {
                put_key(&mut w, &m.cocoon_key);
                w.nested(TAG_GRANT, |n| m.grant.write(n))
                    .put(TAG_SECOND_KEY_ENVELOPE, &m.sealed_q_ca.to_bytes());
            }
            Message::BkeResponse(m) => {
                w.put(TAG_SEALED, &m.sealed.to_bytes());
            }
        }
        let mut body = w.finish();
        let sum = checksum(self.type_code(), &body);
        body.push(TAG_CHECKSUM);
        body.extend_from_slice(&(sum.len() as u32).to_be_bytes());
        body.extend_from_slice(&sum);
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + body.len());
        out.extend_from_slice(FRAME_MAGIC);
        out.push(self.type_code());
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let malformed = |s: &str| Error::MalformedMessage(s.to_string());
        let rest = bytes
            .strip_prefix(FRAME_MAGIC.as_slice())
            .ok_or_else(|| malformed("missing PQCWCMSG magic"))?;
        if rest.len() < 5 {
            return Err(malformed("truncated frame header"));
        }
        let kind = rest[0];
        let len = u32::from_be_bytes([rest[1], rest[2], rest[3], rest[4]]) as usize;
        let body = &rest[5..];
        if body.len() != len {
            return Err(Error::MalformedMessage(format!(
                "frame declares {len} body bytes, carries {}",
                body.len()
            )));
        }
        if body.len() < CHECKSUM_TLV_LEN {
            return Err(malformed("body too short for checksum"));
        }
        let (body, trailer) = body.split_at(body.len() - CHECKSUM_TLV_LEN);
        if trailer[..5] != [TAG_CHECKSUM, 0, 0, 0, 32] {
            return Err(malformed("missing checksum"));
        }
        if trailer[5..] != checksum(kind, body) {
            return Err(malformed("checksum mismatch"));
        }
        let mut r = TlvReader::new(body, Error::MalformedMessage);
        let msg = match kind {
            1 => Message::CertRequestM1(CertRequestM1 {
                public_key: take_key(&mut r)?,
                subject: take_subject(&mut r)?,
            }),
            2 => Message::CaResponseM1(CaResponseM1 {
                certificate: take_cert(&mut r)?,
            }),
            3 => Message::CertRequestM2(CertRequestM2 {
                public_key: take_key(&mut r)?,
                sealed_q3: KeyEnvelope::from_bytes(r.expect(TAG_KEY_ENVELOPE)?)?,
                subject: take_subject(&mut r)?,
            }),
            4 => Message::CaResponseM2(CaResponseM2 {
                certificate: take_cert(&mut r)?,
                sealed_r4: SealedBox::from_bytes(r.expect(TAG_SEALED)?)?,
            }),
            5 => Message::BkeRequest(BkeRequest {
                public_key: take_key(&mut r)?,
                sealed_q_ra: KeyEnvelope::from_bytes(r.expect(TAG_KEY_ENVELOPE)?)?,
                sealed_q_ca: KeyEnvelope::from_bytes(r.expect(TAG_SECOND_KEY_ENVELOPE)?)?,
                subject: take_subject(&mut r)?,
            }),
            6 => {
                let cocoon_key = take_key(&mut r)?;
                let grant_bytes = r.expect(TAG_GRANT)?;
                let mut gr = r.nested(grant_bytes);
                let grant = PermissionGrant::read(&mut gr)?;
                gr.finish()?;
                Message::RaToCaRequest(RaToCaRequest {
                    cocoon_key,
                    grant,
                    sealed_q_ca: KeyEnvelope::from_bytes(r.expect(TAG_SECOND_KEY_ENVELOPE)?)?,
                })
            }
            7 => Message::BkeResponse(BkeResponse {
                sealed: SealedBox::from_bytes(r.expect(TAG_SEALED)?)?,
            }),
            other => {
                return Err(Error::MalformedMessage(format!(
                    "unknown message type {other}"
                )))
            }
        };
        r.finish()?;
        Ok(msg)
    }
}

fn checksum(kind: u8, body: &[u8]) -> [u8; 32] {
    Sha256::new()
        .chain_update([kind])
        .chain_update(body)
        .finalize()
        .into()
}

fn put_key(w: &mut TlvWriter, key: &KeySequence) {
    w.put(TAG_PUBLIC_KEY, &keyfile::encode_key(key, false));
}

fn put_subject(w: &mut TlvWriter, subject: &SubjectInfo) {
    w.nested(TAG_SUBJECT, |n| {
        n.put_str(TAG_SUBJECT_ID, &subject.subject_id)
            .nested(TAG_SUBJECT_GRANT, |g| subject.grant.write(g));
    });
}

fn take_key(r: &mut TlvReader<'_>) -> Result<KeySequence> {
    let (key, _) = keyfile::decode_key(r.expect(TAG_PUBLIC_KEY)?)
        .map_err(|e| Error::MalformedMessage(e.to_string()))?;
    if key.role() != KeyRole::Public {
        return Err(Error::MalformedMessage(
            "message key is not a public key".into(),
        ));
    }
    Ok(key)
}

fn take_subject(r: &mut TlvReader<'_>) -> Result<SubjectInfo> {
    let bytes = r.expect(TAG_SUBJECT)?;
    let mut s = r.nested(bytes);
    let id_bytes = s.expect(TAG_SUBJECT_ID)?;
    let subject_id = s.utf8(id_bytes)?;
    let grant_bytes = s.expect(TAG_SUBJECT_GRANT)?;
    let mut g = s.nested(grant_bytes);
    let grant = PermissionGrant::read(&mut g)?;
    g.finish()?;
    s.finish()?;
    Ok(SubjectInfo { subject_id, grant })
}

fn take_cert(r: &mut TlvReader<'_>) -> Result<AnonymousCertificate> {
    decode_certificate(r.expect(TAG_CERTIFICATE)?)
}
