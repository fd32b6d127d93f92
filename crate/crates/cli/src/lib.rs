//! Command implementations behind the `pqcwc` binary.

pub mod bench;
pub mod commands;
pub mod stats;
pub mod tables;

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Exit codes: 1 is reserved for a well-formed signature that does not
/// verify.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Malformed(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Protocol(_) => 4,
        }
    }
}

impl From<pqcwc::Error> for CliError {
    fn from(e: pqcwc::Error) -> Self {
        use pqcwc::Error as E;
        match e {
            E::UnsupportedAlgorithm(_) | E::InvalidParams(_) | E::InvalidSeed(_) => {
                CliError::Usage(e.to_string())
            }
            E::WrongKeyRole { .. }
            | E::ParamsMismatch(_)
            | E::MalformedSignature(_)
            | E::MalformedKey(_)
            | E::MalformedCertificate(_)
            | E::MalformedMessage(_) => CliError::Malformed(e.to_string()),
            E::DegenerateSeed
            | E::CertificateRejected(_)
            | E::TamperDetected
            | E::KemError(_)
            | E::ProtocolError(_) => CliError::Protocol(e.to_string()),
        }
    }
}
