use pqcwc::expansion::{compose_butterfly, derive_expansion_vector, expand_public_model1};
use pqcwc::protocol::ee::{request_bke, request_model1, request_model2};
use pqcwc::protocol::{
    open_bke_response, ActorId, InsecureTestKem, IssuanceSimulator, Message, PermissionGrant,
    SealedBox, SubjectInfo, TimePeriod,
};
use pqcwc::wots::{self, ChainParams, KeySequence};
use pqcwc::{chain, Error, HashAlgId};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn subject() -> SubjectInfo {
    let grant = PermissionGrant::new(
        vec!["cam".into(), "denm".into()],
        1_700_000_000,
        1_700_604_800,
    )
    .unwrap();
    SubjectInfo::new("obu-0042", grant)
}

fn seed(label: &[u8]) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[..label.len()].copy_from_slice(label);
    s
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn assert_pair_consistent(sk: &KeySequence, pk: &KeySequence) {
    let p = pk.params();
    for (a, b) in sk.elements().iter().zip(pk.elements()) {
        assert_eq!(&chain(p.alg(), a, p.max_digit()), b);
    }
}

fn round_trip(sk: &KeySequence, pk: &KeySequence, rng: &mut ChaCha20Rng, n: usize) {
    let p = pk.params();
    for _ in 0..n {
        let mut msg = vec![0u8; rng.gen_range(0..64)];
        rng.fill_bytes(&mut msg);
        let sig = wots::sign(sk, &msg, p).unwrap();
        assert!(wots::verify(pk, &msg, &sig, p).unwrap());
    }
}

#[test]
fn butterfly_end_to_end_all_parameters() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xb7e);
    for alg in pqcwc::list_algorithms() {
        for (w1, w2) in [(8u8, 4u8), (8, 8), (16, 4), (16, 8)] {
            let params = ChainParams::new(alg, w1, w2).unwrap();
            let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            let run = sim
                .run_bke(&seed, &params, subject(), TimePeriod(7), &mut rng)
                .unwrap();

            let (cert, r_ca) = open_bke_response(run.ee_state.q_ca(), &run.z).unwrap();
            let ev_ra = run.ee_state.ra_vector(run.period).unwrap();
            let ev_ca = derive_expansion_vector(&r_ca, params.m(), w2).unwrap();
            let expected =
                compose_butterfly(run.ee_state.caterpillar_public(), &ev_ra, &ev_ca).unwrap();
            assert_eq!(cert.public_key, expected, "{alg} w1={w1} w2={w2}");
            assert_eq!(run.issued.certificate, cert);
            assert!(sim.ca.issuer().verify(&cert).unwrap());
            assert!(cert.subject_id.is_none());

            if w1 == 8 {
                assert_pair_consistent(&run.issued.private_key, &cert.public_key);
            }
            round_trip(&run.issued.private_key, &cert.public_key, &mut rng, 1);
        }
    }
}

#[test]
fn butterfly_twenty_messages() {
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let params = ChainParams::new(HashAlgId::Sha256, 8, 8).unwrap();
    let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
    let run = sim
        .run_bke(
            &seed(b"twenty"),
            &params,
            subject(),
            TimePeriod(3),
            &mut rng,
        )
        .unwrap();
    round_trip(
        &run.issued.private_key,
        &run.issued.certificate.public_key,
        &mut rng,
        20,
    );
}

#[test]
fn visibility_surrogate() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for alg in [
        HashAlgId::Sha256,
        HashAlgId::Sha3_512,
        HashAlgId::Blake2_384,
    ] {
        let params = ChainParams::new(alg, 8, 8).unwrap();
        let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
        let run = sim
            .run_bke(
                &seed(b"visibility"),
                &params,
                subject(),
                TimePeriod(99),
                &mut rng,
            )
            .unwrap();
        let caterpillar = run.ee_state.caterpillar_public();
        let butterfly = &run.issued.certificate.public_key;

        assert!(!sim.ra.transcript().contains(&butterfly.fingerprint()));
        assert!(sim.ra.transcript().contains(&caterpillar.fingerprint()));
        assert!(!sim.ca.transcript().contains(&caterpillar.fingerprint()));
        assert!(sim.ca.transcript().contains(&butterfly.fingerprint()));

        let to_ca: Vec<_> = sim
            .bus
            .delivered_to(ActorId::CertificateAuthority)
            .collect();
        assert!(!to_ca.is_empty());
        for d in to_ca {
            for b in caterpillar.elements() {
                assert!(!contains(&d.bytes, b));
            }
        }
    }
}

#[test]
fn model1_and_model2_flows() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for alg in [HashAlgId::Sha1, HashAlgId::Sha3_256, HashAlgId::Blake2_256] {
        let params = ChainParams::new(alg, 8, 3).unwrap();
        let mut sim = IssuanceSimulator::with_test_kem(&mut rng);

        let m1 = sim.run_model1(&seed(b"m1"), &params, subject()).unwrap();
        let (_, b) = wots::generate_keypair(&seed(b"m1"), &params).unwrap();
        let cert = &m1.certificate;
        assert_eq!(cert.public_key, expand_public_model1(&b, &params).unwrap());
        assert_ne!(cert.public_key, b);
        assert_eq!(cert.subject_id.as_deref(), Some("obu-0042"));
        assert_pair_consistent(&m1.private_key, &cert.public_key);
        round_trip(&m1.private_key, &cert.public_key, &mut rng, 3);

        let m2 = sim
            .run_model2(&seed(b"m2"), &params, subject(), &mut rng)
            .unwrap();
        let (_, b) = wots::generate_keypair(&seed(b"m2"), &params).unwrap();
        assert_ne!(m2.certificate.public_key, b);
        assert_pair_consistent(&m2.private_key, &m2.certificate.public_key);
        round_trip(&m2.private_key, &m2.certificate.public_key, &mut rng, 3);
        assert!(sim.ca.issuer().verify(&m2.certificate).unwrap());
    }
}

#[test]
fn requests_carry_no_secrets() {
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let params = ChainParams::new(HashAlgId::Sha256, 8, 4).unwrap();
    let sim = IssuanceSimulator::with_test_kem(&mut rng);
    let kem = InsecureTestKem;
    let (a, _) = wots::generate_keypair(&seed(b"secret"), &params).unwrap();

    let (_, r1) = request_model1(&seed(b"secret"), &params, subject()).unwrap();
    let m1 = Message::CertRequestM1(r1).encode();

    let (st2, r2) = request_model2(
        &seed(b"secret"),
        &params,
        subject(),
        &kem,
        sim.ca.public_key(),
        &mut rng,
    )
    .unwrap();
    let m2 = Message::CertRequestM2(r2).encode();

    let (st3, r3) = request_bke(
        &seed(b"secret"),
        &params,
        subject(),
        &kem,
        sim.ra.public_key(),
        sim.ca.public_key(),
        &mut rng,
    )
    .unwrap();
    let m3 = Message::BkeRequest(r3).encode();

    for bytes in [&m1, &m2, &m3] {
        for ai in a.elements() {
            assert!(!contains(bytes, ai));
        }
    }
    assert!(!contains(&m2, st2.q3().as_bytes()));
    assert!(!contains(&m3, st3.q_ra().as_bytes()));
    assert!(!contains(&m3, st3.q_ca().as_bytes()));

    // Same seed, fresh symmetric keys.
    let (_, again) = request_model2(
        &seed(b"secret"),
        &params,
        subject(),
        &kem,
        sim.ca.public_key(),
        &mut rng,
    )
    .unwrap();
    assert_ne!(Message::CertRequestM2(again).encode(), m2);
}

#[test]
fn ra_expansion_is_deterministic() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let params = ChainParams::new(HashAlgId::Sha384, 8, 6).unwrap();
    let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
    let (state, request) = request_bke(
        &seed(b"det"),
        &params,
        subject(),
        &InsecureTestKem,
        sim.ra.public_key(),
        sim.ca.public_key(),
        &mut rng,
    )
    .unwrap();
    let l = TimePeriod(1234);
    let first = sim.ra.process(&request, l).unwrap();
    let second = sim.ra.process(&request, l).unwrap();
    assert_eq!(first.cocoon_key, second.cocoon_key);
    assert_eq!(first.sealed_q_ca, request.sealed_q_ca);

    let ev = state.ra_vector(l).unwrap();
    let own = pqcwc::expand_public_model2(state.caterpillar_public(), &ev).unwrap();
    assert_eq!(own, first.cocoon_key);

    let other = sim.ra.process(&request, TimePeriod(1235)).unwrap();
    assert_ne!(other.cocoon_key, first.cocoon_key);
}

#[test]
fn tampered_response_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let params = ChainParams::new(HashAlgId::Sha256, 8, 4).unwrap();
    let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
    let run = sim
        .run_bke(
            &seed(b"tamper"),
            &params,
            subject(),
            TimePeriod(2),
            &mut rng,
        )
        .unwrap();
    let bytes = run.z.to_bytes();
    for _ in 0..20 {
        let mut t = bytes.clone();
        let i = rng.gen_range(0..t.len());
        t[i] ^= rng.gen_range(1..=255u8);
        let z = SealedBox::from_bytes(&t).unwrap();
        let err = pqcwc::protocol::ee::finalize_bke(run.ee_state.clone(), &z, run.period);
        assert_eq!(err.unwrap_err(), Error::TamperDetected);
    }
    // A different period reproduces the wrong cocoon key.
    let wrong = pqcwc::protocol::ee::finalize_bke(run.ee_state.clone(), &run.z, TimePeriod(3));
    assert!(matches!(wrong, Err(Error::ProtocolError(_))));
}
