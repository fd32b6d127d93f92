//! End-entity side: builds requests from the caterpillar key pair and turns
//! the authorities' responses into the expanded private key.

use rand_core::CryptoRngCore;

use super::cert::{decode_certificate, AnonymousCertificate, SubjectInfo};
use super::envelope::{derive_ra_seed, open, SealedBox, SymmetricKey, TimePeriod};
use super::kem::{Kem, KemPublicKey, KeyEnvelope};
use super::messages::{BkeRequest, CaResponseM2, CertRequestM1, CertRequestM2};
use super::{AAD_Q3, AAD_Q_CA, AAD_Q_RA, AAD_R4, AAD_Z, RANDOM_SEED_LEN};
use crate::error::{Error, Result};
use crate::expansion::{
    derive_expansion_vector, expand_private_model1, expand_private_model2, expand_public_model1,
    expand_public_model2, ExpansionVector,
};
use crate::wots::{generate_keypair, ChainParams, KeySequence};

fn check_certificate(
    params: &ChainParams,
    cert: &AnonymousCertificate,
    expected_key: &KeySequence,
) -> Result<()> {
    if cert.params() != params {
        return Err(Error::ProtocolError(
            "certificate parameters differ from the request".into(),
        ));
    }
    if cert.public_key != *expected_key {
        return Err(Error::ProtocolError(
            "certificate key is not the expansion of our public key".into(),
        ));
    }
    Ok(())
}

/// Caterpillar key pair held between request and finalize.
#[derive(Debug, Clone)]
pub struct Model1Pending {
    params: ChainParams,
    private_key: KeySequence,
    public_key: KeySequence,
}

impl Model1Pending {
    pub fn caterpillar_public(&self) -> &KeySequence {
        &self.public_key
    }
}

pub fn request_model1(
    seed: &[u8],
    params: &ChainParams,
    subject: SubjectInfo,
) -> Result<(Model1Pending, CertRequestM1)> {
    let (private_key, public_key) = generate_keypair(seed, params)?;
    let request = CertRequestM1 {
        public_key: public_key.clone(),
        subject,
    };
    Ok((
        Model1Pending {
            params: *params,
            private_key,
            public_key,
        },
        request,
    ))
}

/// Returns `A'` once the certificate is confirmed to carry `B'`.
pub fn finalize_model1(
    state: Model1Pending,
    cert: AnonymousCertificate,
) -> Result<(KeySequence, AnonymousCertificate)> {
    let expected = expand_public_model1(&state.public_key, &state.params)?;
    check_certificate(&state.params, &cert, &expected)?;
    let expanded = expand_private_model1(&state.private_key, &state.params)?;
    Ok((expanded, cert))
}

#[derive(Debug, Clone)]
pub struct Model2Pending {
    params: ChainParams,
    private_key: KeySequence,
    public_key: KeySequence,
    q3: SymmetricKey,
}

impl Model2Pending {
    pub fn caterpillar_public(&self) -> &KeySequence {
        &self.public_key
    }

    pub fn q3(&self) -> &SymmetricKey {
        &self.q3
    }
}

pub fn request_model2(
    seed: &[u8],
    params: &ChainParams,
    subject: SubjectInfo,
    kem: &dyn Kem,
    ca_public: &KemPublicKey,
    rng: &mut dyn CryptoRngCore,
) -> Result<(Model2Pending, CertRequestM2)> {
    let (private_key, public_key) = generate_keypair(seed, params)?;
    let q3 = SymmetricKey::generate(rng);
    let sealed_q3 = KeyEnvelope::seal(kem, ca_public, &q3, AAD_Q3, rng)?;
    let request = CertRequestM2 {
        public_key: public_key.clone(),
        sealed_q3,
        subject,
    };
    Ok((
        Model2Pending {
            params: *params,
            private_key,
            public_key,
            q3,
        },
        request,
    ))
}

fn unseal_seed(key: &SymmetricKey, aad: &[u8], sealed: &SealedBox) -> Result<Vec<u8>> {
    let seed = open(key, aad, sealed)?;
    if seed.len() != RANDOM_SEED_LEN {
        return Err(Error::ProtocolError(format!(
            "expansion seed has {} bytes",
            seed.len()
        )));
    }
    Ok(seed)
}

/// Unseals `r4`, derives `E` and returns `A''`.
pub fn finalize_model2(
    state: Model2Pending,
    response: CaResponseM2,
) -> Result<(KeySequence, AnonymousCertificate)> {
    let r4 = unseal_seed(&state.q3, AAD_R4, &response.sealed_r4)?;
    let ev = derive_expansion_vector(&r4, state.params.m(), state.params.w2())?;
    let expected = expand_public_model2(&state.public_key, &ev)?;
    check_certificate(&state.params, &response.certificate, &expected)?;
    let expanded = expand_private_model2(&state.private_key, &ev)?;
    Ok((expanded, response.certificate))
}

#[derive(Debug, Clone)]
pub struct BkePending {
    params: ChainParams,
    private_key: KeySequence,
    public_key: KeySequence,
    q_ra: SymmetricKey,
    q_ca: SymmetricKey,
}

impl BkePending {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn caterpillar_public(&self) -> &KeySequence {
        &self.public_key
    }

    pub fn q_ra(&self) -> &SymmetricKey {
        &self.q_ra
    }

    pub fn q_ca(&self) -> &SymmetricKey {
        &self.q_ca
    }

    /// `E_RA`, reproduced offline from `q_RA` and the shared period.
    pub fn ra_vector(&self, l: TimePeriod) -> Result<ExpansionVector> {
        ra_expansion_vector(&self.q_ra, l, &self.params)
    }
}

pub(crate) fn ra_expansion_vector(
    q_ra: &SymmetricKey,
    l: TimePeriod,
    params: &ChainParams,
) -> Result<ExpansionVector> {
    derive_expansion_vector(&derive_ra_seed(q_ra, l), params.m(), params.w2())
}

pub fn request_bke(
    seed: &[u8],
    params: &ChainParams,
    subject: SubjectInfo,
    kem: &dyn Kem,
    ra_public: &KemPublicKey,
    ca_public: &KemPublicKey,
    rng: &mut dyn CryptoRngCore,
) -> Result<(BkePending, BkeRequest)> {
    let (private_key, public_key) = generate_keypair(seed, params)?;
    let q_ra = SymmetricKey::generate(rng);
    let q_ca = SymmetricKey::generate(rng);
    let sealed_q_ra = KeyEnvelope::seal(kem, ra_public, &q_ra, AAD_Q_RA, rng)?;
    let sealed_q_ca = KeyEnvelope::seal(kem, ca_public, &q_ca, AAD_Q_CA, rng)?;
    let request = BkeRequest {
        public_key: public_key.clone(),
        sealed_q_ra,
        sealed_q_ca,
        subject,
    };
    Ok((
        BkePending {
            params: *params,
            private_key,
            public_key,
            q_ra,
            q_ca,
        },
        request,
    ))
}

/// Splits an opened `Z` into the certificate and `r_CA`.
pub(crate) fn split_z(plaintext: &[u8]) -> Result<(AnonymousCertificate, &[u8])> {
    if plaintext.len() < RANDOM_SEED_LEN {
        return Err(Error::ProtocolError("sealed response too short".into()));
    }
    let (cert_bytes, r_ca) = plaintext.split_at(plaintext.len() - RANDOM_SEED_LEN);
    Ok((decode_certificate(cert_bytes)?, r_ca))
}

/// Opens `Z` with `q_CA`, then expands `A` by `E_RA` into the cocoon key and
/// the cocoon key by `E_CA` into the butterfly key `A''`.
pub fn finalize_bke(
    state: BkePending,
    z: &SealedBox,
    l: TimePeriod,
) -> Result<(KeySequence, AnonymousCertificate)> {
    let plaintext = open(&state.q_ca, AAD_Z, z)?;
    let (cert, r_ca) = split_z(&plaintext)?;
    let ev_ra = state.ra_vector(l)?;
    let ev_ca = derive_expansion_vector(r_ca, state.params.m(), state.params.w2())?;
    let cocoon_public = expand_public_model2(&state.public_key, &ev_ra)?;
    let expected = expand_public_model2(&cocoon_public, &ev_ca)?;
    check_certificate(&state.params, &cert, &expected)?;
    let cocoon = expand_private_model2(&state.private_key, &ev_ra)?;
    let butterfly = expand_private_model2(&cocoon, &ev_ca)?;
    Ok((butterfly, cert))
}
