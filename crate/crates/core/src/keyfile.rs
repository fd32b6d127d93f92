//! Binary and hex-armored encodings for keys and signatures.
//!
//! ```text
//! "PQCWC1" | u8 kind | u8 alg index | u8 w1 | u8 w2 | be16 m | m x (be16 len | bytes)
//! ```
//!
//! `kind` is 0 for a private key, 1 for a public key and 2 for a signature.
//! Bit 7 of `kind` marks a private key that has already signed something.
//! The flag is advisory; nothing refuses to load a used key.

use crate::error::{Error, Result};
use crate::hash_suite::HashAlgId;
use crate::wots::{ChainParams, KeyRole, KeySequence, Signature};

pub const MAGIC: &[u8; 6] = b"PQCWC1";

const KIND_PRIVATE: u8 = 0;
const KIND_PUBLIC: u8 = 1;
const KIND_SIGNATURE: u8 = 2;
const USED_FLAG: u8 = 0x80;

/// Anything that can live in a key file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredObject {
    Key { key: KeySequence, used: bool },
    Signature(Signature),
}

fn encode(kind: u8, params: &ChainParams, elements: &[Vec<u8>]) -> Vec<u8> {
    let body: usize = elements.iter().map(|e| 2 + e.len()).sum();
    let mut out = Vec::with_capacity(MAGIC.len() + 6 + body);
    out.extend_from_slice(MAGIC);
    out.push(kind);
    out.push(params.alg().index());
    out.push(params.w1());
    out.push(params.w2());
    out.extend_from_slice(&(elements.len() as u16).to_be_bytes());
    for e in elements {
        out.extend_from_slice(&(e.len() as u16).to_be_bytes());
        out.extend_from_slice(e);
    }
    out
}

pub fn encode_key(key: &KeySequence, used: bool) -> Vec<u8> {
    let mut kind = match key.role() {
        KeyRole::Private => KIND_PRIVATE,
        KeyRole::Public => KIND_PUBLIC,
    };
    if used && key.role() == KeyRole::Private {
        kind |= USED_FLAG;
    }
    encode(kind, key.params(), key.elements())
}

pub fn encode_signature(sig: &Signature) -> Vec<u8> {
    encode(KIND_SIGNATURE, sig.params(), sig.elements())
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedKey(msg.into())
}

pub fn decode(bytes: &[u8]) -> Result<StoredObject> {
    let body = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| malformed("missing PQCWC1 magic"))?;
    if body.len() < 6 {
        return Err(malformed("truncated header"));
    }
    let kind = body[0];
    let alg = HashAlgId::from_index(body[1])?;
    let params = ChainParams::new(alg, body[2], body[3])?;
    let m = u16::from_be_bytes([body[4], body[5]]) as usize;
    let mut rest = &body[6..];
    let mut elements = Vec::with_capacity(m.min(rest.len() / 2));
    for i in 0..m {
        if rest.len() < 2 {
            return Err(malformed(format!("truncated before element {i}")));
        }
        let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        rest = &rest[2..];
        if rest.len() < len {
            return Err(malformed(format!("element {i} truncated")));
        }
        elements.push(rest[..len].to_vec());
        rest = &rest[len..];
    }
    if !rest.is_empty() {
        return Err(malformed(format!("{} trailing bytes", rest.len())));
    }
    match kind & !USED_FLAG {
        KIND_PRIVATE => Ok(StoredObject::Key {
            key: KeySequence::new(KeyRole::Private, elements, params)?,
            used: kind & USED_FLAG != 0,
        }),
        KIND_PUBLIC if kind & USED_FLAG == 0 => Ok(StoredObject::Key {
            key: KeySequence::new(KeyRole::Public, elements, params)?,
            used: false,
        }),
        KIND_SIGNATURE if kind & USED_FLAG == 0 => {
            if elements.len() != params.m() {
                return Err(malformed(format!(
                    "signature has {} elements, expected {}",
                    elements.len(),
                    params.m()
                )));
            }
            Ok(StoredObject::Signature(Signature::from_parts(
                elements, params,
            )))
        }
        _ => Err(malformed(format!("unknown object kind {kind:#04x}"))),
    }
}

/// Decodes a key, returning it with its used flag.
pub fn decode_key(bytes: &[u8]) -> Result<(KeySequence, bool)> {
    match decode(bytes)? {
        StoredObject::Key { key, used } => Ok((key, used)),
        StoredObject::Signature(_) => Err(malformed("expected a key, found a signature")),
    }
}

pub fn decode_signature(bytes: &[u8]) -> Result<Signature> {
    match decode(bytes) {
        Ok(StoredObject::Signature(sig)) => Ok(sig),
        Ok(StoredObject::Key { .. }) => Err(Error::MalformedSignature(
            "expected a signature, found a key".into(),
        )),
        Err(e) => Err(Error::MalformedSignature(e.to_string())),
    }
}

const ARMOR_WIDTH: usize = 64;

fn armor_label(bytes: &[u8]) -> &'static str {
    match bytes.get(MAGIC.len()).map(|k| k & !USED_FLAG) {
        Some(KIND_PRIVATE) => "PRIVATE KEY",
        Some(KIND_PUBLIC) => "PUBLIC KEY",
        Some(KIND_SIGNATURE) => "SIGNATURE",
        _ => "OBJECT",
    }
}

/// Hex armor with informational header lines. Headers are ignored on read;
/// the binary payload is authoritative.
pub fn armor(bytes: &[u8]) -> String {
    let label = armor_label(bytes);
    let mut out = format!("-----BEGIN PQCWC {label}-----\n");
    if let Ok(obj) = decode(bytes) {
        let (params, count) = match &obj {
            StoredObject::Key { key, .. } => (*key.params(), key.elements().len()),
            StoredObject::Signature(sig) => (*sig.params(), sig.elements().len()),
        };
        out.push_str(&format!("Algorithm: {}\n", params.alg()));
        out.push_str(&format!(
            "W1: {}\nW2: {}\nM: {count}\n",
            params.w1(),
            params.w2()
        ));
        if let StoredObject::Key { used: true, .. } = obj {
            out.push_str("Used: yes\n");
        }
    }
    out.push('\n');
    let hex = hex::encode(bytes);
    for line in hex.as_bytes().chunks(ARMOR_WIDTH) {
        out.push_str(std::str::from_utf8(line).expect("hex is ascii"));
        out.push('\n');
    }
    out.push_str(&format!("-----END PQCWC {label}-----\n"));
    out
}

pub fn dearmor(text: &str) -> Result<Vec<u8>> {
    let mut lines = text.lines().map(str::trim);
    let begin = lines
        .by_ref()
        .find(|l| !l.is_empty())
        .ok_or_else(|| malformed("empty armor"))?;
    if !begin.starts_with("-----BEGIN PQCWC ") {
        return Err(malformed("missing armor header"));
    }
    let mut hex_body = String::new();
    let mut in_body = false;
    let mut ended = false;
    for line in lines {
        if line.starts_with("-----END PQCWC ") {
            ended = true;
            break;
        }
        if !in_body {
            if line.is_empty() {
                in_body = true;
            } else if !line.contains(':') {
                return Err(malformed("bad armor header line"));
            }
            continue;
        }
        hex_body.push_str(line);
    }
    if !ended {
        return Err(malformed("missing armor footer"));
    }
    hex::decode(&hex_body).map_err(|e| malformed(format!("bad armor hex: {e}")))
}

/// Accepts either the binary form or its armored text.
pub fn read_bytes(input: &[u8]) -> Result<Vec<u8>> {
    if input.starts_with(b"-----BEGIN") || input.first().is_some_and(u8::is_ascii_whitespace) {
        let text = std::str::from_utf8(input).map_err(|_| malformed("armor is not utf-8"))?;
        dearmor(text)
    } else {
        Ok(input.to_vec())
    }
}
