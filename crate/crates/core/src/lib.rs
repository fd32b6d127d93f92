//! Anonymous certificates from checksum-free Winternitz one-time signatures.
//!
//! Keys are hash chains. Moving every chain start forward by a shared amount
//! yields a fresh key pair that still verifies, and the issued certificate
//! carries only the expanded public key. Two successive expansions by two
//! authorities give a hash-based butterfly key expansion in which neither
//! authority can link the certified key to the requester's original key.

pub mod error;
pub mod expansion;
pub mod hash_suite;
pub mod keyfile;
pub mod protocol;
pub mod wots;

pub use error::{Error, Result};
pub use expansion::{
    compose_butterfly, derive_expansion_vector, expand_private_model1, expand_private_model2,
    expand_public_model1, expand_public_model2, ExpansionVector,
};
pub use hash_suite::{chain, hash, list_algorithms, Digest, HashAlgId};
pub use wots::{
    compress_public_key, derive_private_key, digest_to_elements, generate_keypair, sign,
    sign_digest, verify, verify_digest, ChainParams, KeyRole, KeySequence, MessageElements,
    Signature,
};
