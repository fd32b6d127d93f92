//! Three-actor issuance of anonymous certificates.
//!
//! * Model 1: EE and CA only; the CA expands `B` by the fixed depth.
//! * Model 2: EE and CA only; the CA expands `B` by a vector derived from a
//!   random seed `r4` that it returns to the EE under `q3`.
//! * Butterfly: the RA expands `B` into the cocoon key `B'` by a vector
//!   derived from `(q_RA, l)`, then the CA expands `B'` into the butterfly
//!   key `B''` by a vector derived from its own `r_CA`. The RA never sees
//!   `B''` and the CA never sees `B`.
//!
//! [`IssuanceSimulator`] drives each flow over a [`MessageBus`] so every
//! message is serialized between actors.

pub mod bus;
pub mod ca;
pub mod cert;
pub mod ee;
pub mod envelope;
pub mod kem;
pub mod messages;
pub mod ra;
mod tlv;

use std::sync::Arc;

use rand_core::CryptoRngCore;

pub use bus::{ActorId, ActorTranscript, Delivery, MessageBus};
pub use ca::CertificateAuthority;
pub use cert::{
    decode_certificate, encode_certificate, AnonymousCertificate, IssuerIdentity, PermissionGrant,
    SubjectInfo,
};
pub use ee::{BkePending, Model1Pending, Model2Pending};
pub use envelope::{derive_ra_seed, open, seal, SealedBox, SymmetricKey, TimePeriod};
pub use kem::{InsecureTestKem, Kem, KemKeyPair, KemPublicKey, KemSecretKey, KeyEnvelope};
pub use messages::Message;
pub use ra::RegistrationAuthority;

use crate::error::{Error, Result};
use crate::wots::{ChainParams, KeySequence};
use messages::{BkeResponse, CaResponseM1};

/// Length of the CA's random expansion seeds `r4` and `r_CA`.
pub const RANDOM_SEED_LEN: usize = 32;

pub(crate) const AAD_Q3: &[u8] = b"pqcwc/q3";
pub(crate) const AAD_Q_RA: &[u8] = b"pqcwc/q_ra";
pub(crate) const AAD_Q_CA: &[u8] = b"pqcwc/q_ca";
pub(crate) const AAD_R4: &[u8] = b"pqcwc/r4";
pub(crate) const AAD_Z: &[u8] = b"pqcwc/z";

/// Opens a butterfly response `Z` with `q_CA`, returning the certificate and
/// `r_CA`.
pub fn open_bke_response(
    q_ca: &SymmetricKey,
    z: &SealedBox,
) -> Result<(AnonymousCertificate, Vec<u8>)> {
    let plaintext = open(q_ca, AAD_Z, z)?;
    let (cert, r_ca) = ee::split_z(&plaintext)?;
    Ok((cert, r_ca.to_vec()))
}

/// Expanded private key together with the certificate for its public half.
#[derive(Debug, Clone)]
pub struct Issued {
    pub private_key: KeySequence,
    pub certificate: AnonymousCertificate,
}

/// A finished butterfly run plus what an omniscient observer needs to
/// recompute the expected butterfly key.
#[derive(Debug, Clone)]
pub struct BkeRun {
    pub issued: Issued,
    pub ee_state: BkePending,
    pub z: SealedBox,
    pub period: TimePeriod,
}

fn unexpected(expected: &str, got: &Message) -> Error {
    Error::ProtocolError(format!(
        "expected {expected}, received message type {}",
        got.type_code()
    ))
}

pub struct IssuanceSimulator {
    kem: Arc<dyn Kem>,
    pub ra: RegistrationAuthority,
    pub ca: CertificateAuthority,
    pub bus: MessageBus,
}

impl IssuanceSimulator {
    pub fn new(kem: Arc<dyn Kem>, ca_name: &str, rng: &mut dyn CryptoRngCore) -> Self {
        let mut root = [0u8; 32];
        rng.fill_bytes(&mut root);
        let ra = RegistrationAuthority::new(kem.clone(), rng);
        let ca = CertificateAuthority::new(kem.clone(), IssuerIdentity::new(ca_name, root), rng);
        Self {
            kem,
            ra,
            ca,
            bus: MessageBus::new(),
        }
    }

    /// Simulator backed by [`InsecureTestKem`].
    pub fn with_test_kem(rng: &mut dyn CryptoRngCore) -> Self {
        Self::new(Arc::new(InsecureTestKem), "pqcwc-test-ca", rng)
    }

    pub fn run_model1(
        &mut self,
        seed: &[u8],
        params: &ChainParams,
        subject: SubjectInfo,
    ) -> Result<Issued> {
        let (state, request) = ee::request_model1(seed, params, subject)?;
        self.bus.send(
            ActorId::EndEntity,
            ActorId::CertificateAuthority,
            &Message::CertRequestM1(request),
        );

        let request = match self.bus.receive(ActorId::CertificateAuthority)?.1 {
            Message::CertRequestM1(r) => r,
            other => return Err(unexpected("CertRequestM1", &other)),
        };
        let certificate = self.ca.issue_model1(&request)?;
        self.bus.send(
            ActorId::CertificateAuthority,
            ActorId::EndEntity,
            &Message::CaResponseM1(CaResponseM1 { certificate }),
        );

        let response = match self.bus.receive(ActorId::EndEntity)?.1 {
            Message::CaResponseM1(r) => r,
            other => return Err(unexpected("CaResponseM1", &other)),
        };
        let (private_key, certificate) = ee::finalize_model1(state, response.certificate)?;
        Ok(Issued {
            private_key,
            certificate,
        })
    }

    pub fn run_model2(
        &mut self,
        seed: &[u8],
        params: &ChainParams,
        subject: SubjectInfo,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Issued> {
        let ca_public = self.ca.public_key().clone();
        let (state, request) =
            ee::request_model2(seed, params, subject, self.kem.as_ref(), &ca_public, rng)?;
        self.bus.send(
            ActorId::EndEntity,
            ActorId::CertificateAuthority,
            &Message::CertRequestM2(request),
        );

        let request = match self.bus.receive(ActorId::CertificateAuthority)?.1 {
            Message::CertRequestM2(r) => r,
            other => return Err(unexpected("CertRequestM2", &other)),
        };
        let response = self.ca.issue_model2(&request, rng)?;
        self.bus.send(
            ActorId::CertificateAuthority,
            ActorId::EndEntity,
            &Message::CaResponseM2(response),
        );

        let response = match self.bus.receive(ActorId::EndEntity)?.1 {
            Message::CaResponseM2(r) => r,
            other => return Err(unexpected("CaResponseM2", &other)),
        };
        let (private_key, certificate) = ee::finalize_model2(state, response)?;
        Ok(Issued {
            private_key,
            certificate,
        })
    }

    /// Full EE -> RA -> CA -> RA -> EE butterfly flow. If the RA's
    /// deterministic vector is degenerate the EE retries with fresh AES keys.
    pub fn run_bke(
        &mut self,
        seed: &[u8],
        params: &ChainParams,
        subject: SubjectInfo,
        l: TimePeriod,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<BkeRun> {
        let ra_public = self.ra.public_key().clone();
        let ca_public = self.ca.public_key().clone();
        let mut attempts = 0;
        let (state, forwarded) = loop {
            attempts += 1;
            let (state, request) = ee::request_bke(
                seed,
                params,
                subject.clone(),
                self.kem.as_ref(),
                &ra_public,
                &ca_public,
                rng,
            )?;
            self.bus.send(
                ActorId::EndEntity,
                ActorId::RegistrationAuthority,
                &Message::BkeRequest(request),
            );
            let request = match self.bus.receive(ActorId::RegistrationAuthority)?.1 {
                Message::BkeRequest(r) => r,
                other => return Err(unexpected("BkeRequest", &other)),
            };
            match self.ra.process(&request, l) {
                Ok(fwd) => break (state, fwd),
                Err(Error::DegenerateSeed) if attempts < ca::MAX_SEED_DRAWS => continue,
                Err(e) => return Err(e),
            }
        };
        self.bus.send(
            ActorId::RegistrationAuthority,
            ActorId::CertificateAuthority,
            &Message::RaToCaRequest(forwarded),
        );

        let ra_request = match self.bus.receive(ActorId::CertificateAuthority)?.1 {
            Message::RaToCaRequest(r) => r,
            other => return Err(unexpected("RaToCaRequest", &other)),
        };
        let z = self.ca.issue_bke(&ra_request, rng)?;
        self.bus.send(
            ActorId::CertificateAuthority,
            ActorId::RegistrationAuthority,
            &Message::BkeResponse(BkeResponse { sealed: z }),
        );

        // The RA relays the CA's response without decoding it.
        let relay = self
            .bus
            .receive_bytes(ActorId::RegistrationAuthority)
            .ok_or_else(|| Error::ProtocolError("no response from CA".into()))?;
        self.bus.send_bytes(
            ActorId::RegistrationAuthority,
            ActorId::EndEntity,
            relay.bytes,
        );

        let z = match self.bus.receive(ActorId::EndEntity)?.1 {
            Message::BkeResponse(r) => r.sealed,
            other => return Err(unexpected("BkeResponse", &other)),
        };
        let (private_key, certificate) = ee::finalize_bke(state.clone(), &z, l)?;
        Ok(BkeRun {
            issued: Issued {
                private_key,
                certificate,
            },
            ee_state: state,
            z,
            period: l,
        })
    }
}
