use thiserror::Error;

/// Errors produced anywhere in the scheme, from hashing through issuance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported hash algorithm: {0}")]
    UnsupportedAlgorithm(String),

    #[error("invalid seed: expected 32 bytes, got {0}")]
    InvalidSeed(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("wrong key role: expected {expected}, found {found}")]
    WrongKeyRole {
        expected: &'static str,
        found: &'static str,
    },

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("malformed signature: {0}")]
    MalformedSignature(String),

    #[error("malformed key encoding: {0}")]
    MalformedKey(String),

    #[error("expansion seed yields an all-zero expansion vector")]
    DegenerateSeed,

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("certificate rejected: {0}")]
    CertificateRejected(String),

    #[error("malformed message: {0}")]
    MalformedMessage(String),

    #[error("authenticated decryption failed")]
    TamperDetected,

    #[error("kem failure: {0}")]
    KemError(String),

    #[error("protocol error: {0}")]
    ProtocolError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
