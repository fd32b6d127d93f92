//! Certificate authority: performs the final expansion and issues the
//! anonymous certificate.

use std::sync::Arc;

use rand_core::CryptoRngCore;

use super::bus::{ActorId, ActorTranscript};
use super::cert::{
    encode_certificate, AnonymousCertificate, IssuerIdentity, PermissionGrant, CERT_VERSION,
};
use super::envelope::{seal, SealedBox};
use super::kem::{Kem, KemKeyPair, KemPublicKey};
use super::messages::{CaResponseM2, CertRequestM1, CertRequestM2, RaToCaRequest};
use super::{AAD_Q3, AAD_Q_CA, AAD_R4, AAD_Z, RANDOM_SEED_LEN};
use crate::error::{Error, Result};
use crate::expansion::{
    derive_expansion_vector, expand_public_model1, expand_public_model2, ExpansionVector,
};
use crate::wots::{ChainParams, KeySequence};

/// Fresh seeds drawn before giving up on a degenerate expansion vector.
pub const MAX_SEED_DRAWS: usize = 16;

pub struct CertificateAuthority {
    kem: Arc<dyn Kem>,
    keypair: KemKeyPair,
    issuer: IssuerIdentity,
    transcript: ActorTranscript,
}

impl CertificateAuthority {
    pub fn new(kem: Arc<dyn Kem>, issuer: IssuerIdentity, rng: &mut dyn CryptoRngCore) -> Self {
        let keypair = kem.generate_keypair(rng);
        Self {
            kem,
            keypair,
            issuer,
            transcript: ActorTranscript::new(ActorId::CertificateAuthority),
        }
    }

    pub fn public_key(&self) -> &KemPublicKey {
        &self.keypair.public
    }

    pub fn issuer(&self) -> &IssuerIdentity {
        &self.issuer
    }

    pub fn transcript(&self) -> &ActorTranscript {
        &self.transcript
    }

    fn certify(
        &mut self,
        public_key: KeySequence,
        subject_id: Option<String>,
        grant: PermissionGrant,
    ) -> Result<AnonymousCertificate> {
        self.transcript.observe(&public_key);
        let mut cert = AnonymousCertificate {
            version: CERT_VERSION,
            public_key,
            subject_id,
            grant,
            issuer_id: Vec::new(),
            issuer_signature: Vec::new(),
        };
        self.issuer.sign(&mut cert)?;
        Ok(cert)
    }

    /// Draws a random seed until its expansion vector is not all zero.
    fn draw_vector(
        params: &ChainParams,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<([u8; RANDOM_SEED_LEN], ExpansionVector)> {
        for _ in 0..MAX_SEED_DRAWS {
            let mut seed = [0u8; RANDOM_SEED_LEN];
            rng.fill_bytes(&mut seed);
            match derive_expansion_vector(&seed, params.m(), params.w2()) {
                Ok(ev) => return Ok((seed, ev)),
                Err(Error::DegenerateSeed) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::DegenerateSeed)
    }

    /// Model 1: certifies `B' = f^(2^w2 - 1)(B)`.
    pub fn issue_model1(&mut self, request: &CertRequestM1) -> Result<AnonymousCertificate> {
        self.transcript.observe(&request.public_key);
        let params = *request.public_key.params();
        let expanded = expand_public_model1(&request.public_key, &params)?;
        self.certify(
            expanded,
            Some(request.subject.subject_id.clone()),
            request.subject.grant.clone(),
        )
    }

    /// Model 2: draws `r4`, certifies `B'' = f^E(r4)(B)` and returns `r4`
    /// sealed under `q3`.
    pub fn issue_model2(
        &mut self,
        request: &CertRequestM2,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<CaResponseM2> {
        self.transcript.observe(&request.public_key);
        let q3 = request
            .sealed_q3
            .open(self.kem.as_ref(), &self.keypair.secret, AAD_Q3)?;
        let (r4, ev) = Self::draw_vector(request.public_key.params(), rng)?;
        let expanded = expand_public_model2(&request.public_key, &ev)?;
        let certificate = self.certify(
            expanded,
            Some(request.subject.subject_id.clone()),
            request.subject.grant.clone(),
        )?;
        let sealed_r4 = seal(&q3, AAD_R4, &r4, rng);
        Ok(CaResponseM2 {
            certificate,
            sealed_r4,
        })
    }

    /// Butterfly step: draws `r_CA`, expands the cocoon key `B'` into the
    /// butterfly key `B''`, certifies it under `J` and returns
    /// `Z = seal_{q_CA}(cert || r_CA)`.
    pub fn issue_bke(
        &mut self,
        request: &RaToCaRequest,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<SealedBox> {
        self.transcript.observe(&request.cocoon_key);
        let q_ca = request
            .sealed_q_ca
            .open(self.kem.as_ref(), &self.keypair.secret, AAD_Q_CA)?;
        let (r_ca, ev) = Self::draw_vector(request.cocoon_key.params(), rng)?;
        let butterfly = expand_public_model2(&request.cocoon_key, &ev)?;
        let cert = self.certify(butterfly, None, request.grant.clone())?;
        let mut plaintext = encode_certificate(&cert);
        plaintext.extend_from_slice(&r_ca);
        Ok(seal(&q_ca, AAD_Z, &plaintext, rng))
    }
}
