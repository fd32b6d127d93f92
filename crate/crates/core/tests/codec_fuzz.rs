//! Randomized round trips and corruptions for the certificate and message
//! codecs.

use pqcwc::protocol::cert::CERT_VERSION;
use pqcwc::protocol::messages::{
    BkeRequest, BkeResponse, CaResponseM1, CaResponseM2, CertRequestM1, CertRequestM2,
    RaToCaRequest,
};
use pqcwc::protocol::{
    decode_certificate, encode_certificate, AnonymousCertificate, KeyEnvelope, Message,
    PermissionGrant, SealedBox, SubjectInfo,
};
use pqcwc::wots::{ChainParams, KeyRole, KeySequence};
use pqcwc::{list_algorithms, Error};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const CASES: usize = 1000;

fn bytes(rng: &mut ChaCha20Rng, lo: usize, hi: usize) -> Vec<u8> {
    let mut v = vec![0u8; rng.gen_range(lo..=hi)];
    rng.fill_bytes(&mut v);
    v
}

fn text(rng: &mut ChaCha20Rng) -> String {
    const POOL: &[&str] = &["a", "Z", "7", "-", "é", "車", "🚗", " "];
    (0..rng.gen_range(1..12))
        .map(|_| *POOL.choose(rng).unwrap())
        .collect()
}

fn public_key(rng: &mut ChaCha20Rng) -> KeySequence {
    let alg = *list_algorithms().choose(rng).unwrap();
    let w1 = *[1u8, 2, 4, 8, 16].choose(rng).unwrap();
    let params = ChainParams::new(alg, w1, rng.gen_range(1..=16)).unwrap();
    let elements = (0..params.m())
        .map(|_| {
            let mut e = vec![0u8; alg.digest_len()];
            rng.fill_bytes(&mut e);
            e
        })
        .collect();
    KeySequence::new(KeyRole::Public, elements, params).unwrap()
}

fn grant(rng: &mut ChaCha20Rng) -> PermissionGrant {
    let perms = (0..rng.gen_range(1..5)).map(|_| text(rng)).collect();
    let nb = rng.gen_range(0..u64::MAX - 1);
    let na = rng.gen_range(nb + 1..=u64::MAX);
    PermissionGrant::new(perms, nb, na).unwrap()
}

fn subject(rng: &mut ChaCha20Rng) -> SubjectInfo {
    SubjectInfo::new(text(rng), grant(rng))
}

fn cert(rng: &mut ChaCha20Rng) -> AnonymousCertificate {
    AnonymousCertificate {
        version: CERT_VERSION,
        public_key: public_key(rng),
        subject_id: rng.gen_bool(0.5).then(|| text(rng)),
        grant: grant(rng),
        issuer_id: bytes(rng, 0, 40),
        issuer_signature: bytes(rng, 0, 300),
    }
}

fn sealed(rng: &mut ChaCha20Rng) -> SealedBox {
    SealedBox::from_bytes(&bytes(rng, 28, 120)).unwrap()
}

fn envelope(rng: &mut ChaCha20Rng) -> KeyEnvelope {
    KeyEnvelope {
        kem_ciphertext: bytes(rng, 0, 64),
        sealed_key: sealed(rng),
    }
}

fn message(rng: &mut ChaCha20Rng) -> Message {
    match rng.gen_range(1..=7) {
        1 => Message::CertRequestM1(CertRequestM1 {
            public_key: public_key(rng),
            subject: subject(rng),
        }),
        2 => Message::CaResponseM1(CaResponseM1 {
            certificate: cert(rng),
        }),
        3 => Message::CertRequestM2(CertRequestM2 {
            public_key: public_key(rng),
            sealed_q3: envelope(rng),
            subject: subject(rng),
        }),
        4 => Message::CaResponseM2(CaResponseM2 {
            certificate: cert(rng),
            sealed_r4: sealed(rng),
        }),
        5 => Message::BkeRequest(BkeRequest {
            public_key: public_key(rng),
            sealed_q_ra: envelope(rng),
            sealed_q_ca: envelope(rng),
            subject: subject(rng),
        }),
        6 => Message::RaToCaRequest(RaToCaRequest {
            cocoon_key: public_key(rng),
            grant: grant(rng),
            sealed_q_ca: envelope(rng),
        }),
        _ => Message::BkeResponse(BkeResponse {
            sealed: sealed(rng),
        }),
    }
}

/// Truncation, byte overwrite, insertion or deletion.
fn corrupt(rng: &mut ChaCha20Rng, good: &[u8]) -> (Vec<u8>, bool) {
    let mut t = good.to_vec();
    match rng.gen_range(0..4) {
        0 => {
            t.truncate(rng.gen_range(0..good.len()));
            return (t, true);
        }
        1 => {
            let i = rng.gen_range(0..t.len());
            t[i] ^= rng.gen_range(1..=255u8);
        }
        2 => {
            let i = rng.gen_range(0..=t.len());
            t.insert(i, rng.gen());
        }
        _ => {
            t.remove(rng.gen_range(0..t.len()));
        }
    }
    (t, false)
}

#[test]
fn certificates_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xce27);
    for _ in 0..CASES {
        let c = cert(&mut rng);
        let enc = encode_certificate(&c);
        let back = decode_certificate(&enc).unwrap();
        assert_eq!(back, c);
        assert_eq!(encode_certificate(&back), enc);
    }
}

#[test]
fn messages_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x3e55);
    for _ in 0..CASES {
        let m = message(&mut rng);
        let enc = m.encode();
        let back = Message::decode(&enc).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.encode(), enc);
    }
}

// A corrupted value byte can still parse (a permission string, say). When it
// does, the result must re-encode to exactly the corrupted input.
#[test]
fn corrupted_certificates_fail_cleanly() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xbad1);
    let mut rejected = 0;
    for _ in 0..CASES {
        let good = encode_certificate(&cert(&mut rng));
        let (bad, truncated) = corrupt(&mut rng, &good);
        match decode_certificate(&bad) {
            Err(Error::MalformedCertificate(_)) => rejected += 1,
            Err(e) => panic!("unexpected error class {e:?}"),
            Ok(c) => {
                assert!(!truncated);
                assert_eq!(encode_certificate(&c), bad);
            }
        }
    }
    assert!(rejected > CASES / 2, "only {rejected} rejected");
}

#[test]
fn corrupted_messages_fail_cleanly() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xbad2);
    for _ in 0..CASES {
        let good = message(&mut rng).encode();
        let (bad, _) = corrupt(&mut rng, &good);
        match Message::decode(&bad) {
            Err(Error::MalformedMessage(_)) => {}
            other => panic!("corruption not rejected: {other:?}"),
        }
    }
}

#[test]
fn arbitrary_bytes_never_panic() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xf22);
    for _ in 0..CASES {
        let mut b = bytes(&mut rng, 0, 200);
        if rng.gen_bool(0.5) {
            let mut framed = b"PQCWCMSG".to_vec();
            framed.push(rng.gen_range(0..9));
            framed.extend_from_slice(&(b.len() as u32).to_be_bytes());
            framed.append(&mut b);
            b = framed;
        }
        assert!(Message::decode(&b).is_err());
        assert!(decode_certificate(&b).is_err());
    }
}

#[test]
fn corrupted_signed_certificates_are_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5163);
    let mut issuer = pqcwc::protocol::IssuerIdentity::new("fuzz-ca", [3u8; 32]);
    for _ in 0..200 {
        let mut c = cert(&mut rng);
        issuer.sign(&mut c).unwrap();
        let good = encode_certificate(&c);
        assert_eq!(issuer.decode_verified(&good).unwrap(), c);
        let (bad, _) = corrupt(&mut rng, &good);
        match issuer.decode_verified(&bad) {
            Err(Error::MalformedCertificate(_) | Error::CertificateRejected(_)) => {}
            other => panic!("corruption not rejected: {other:?}"),
        }
    }
}
