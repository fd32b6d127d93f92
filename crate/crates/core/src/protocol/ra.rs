//! Registration authority: vets the request and produces the cocoon key.

use std::sync::Arc;

use rand_core::CryptoRngCore;

use super::bus::{ActorId, ActorTranscript};
use super::ee::ra_expansion_vector;
use super::envelope::TimePeriod;
use super::kem::{Kem, KemKeyPair, KemPublicKey};
use super::messages::{BkeRequest, RaToCaRequest};
use super::AAD_Q_RA;
use crate::error::Result;
use crate::expansion::expand_public_model2;

pub struct RegistrationAuthority {
    kem: Arc<dyn Kem>,
    keypair: KemKeyPair,
    transcript: ActorTranscript,
}

impl RegistrationAuthority {
    pub fn new(kem: Arc<dyn Kem>, rng: &mut dyn CryptoRngCore) -> Self {
        let keypair = kem.generate_keypair(rng);
        Self {
            kem,
            keypair,
            transcript: ActorTranscript::new(ActorId::RegistrationAuthority),
        }
    }

    pub fn public_key(&self) -> &KemPublicKey {
        &self.keypair.public
    }

    pub fn transcript(&self) -> &ActorTranscript {
        &self.transcript
    }

    /// Expands `B` by `E_RA = PRG(AES_{q_RA}(l))` into `B'` and forwards
    /// `B'`, `J` and the still-sealed `q_CA'`.
    ///
    /// `E_RA` is fully determined by `(q_RA, l)`, so a degenerate vector
    /// cannot be resampled here; the end entity must send a fresh request.
    pub fn process(&mut self, request: &BkeRequest, l: TimePeriod) -> Result<RaToCaRequest> {
        self.transcript.observe(&request.public_key);
        let q_ra = request
            .sealed_q_ra
            .open(self.kem.as_ref(), &self.keypair.secret, AAD_Q_RA)?;
        let ev = ra_expansion_vector(&q_ra, l, request.public_key.params())?;
        let cocoon_key = expand_public_model2(&request.public_key, &ev)?;
        self.transcript.observe(&cocoon_key);
        Ok(RaToCaRequest {
            cocoon_key,
            grant: request.subject.grant.clone(),
            sealed_q_ca: request.sealed_q_ca.clone(),
        })
    }
}
