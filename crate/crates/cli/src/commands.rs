//! Key, signature and certificate commands. Each returns its result plus
//! any warnings for the caller to print.

use std::fs;
use std::path::{Path, PathBuf};

use pqcwc::keyfile::{self, StoredObject};
use pqcwc::protocol::{
    decode_certificate, encode_certificate, AnonymousCertificate, IssuanceSimulator,
    PermissionGrant, SubjectInfo, TimePeriod,
};
use pqcwc::{ChainParams, HashAlgId, KeyRole, KeySequence};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::stats::{ttest_two_sample, TTestResult};
use crate::CliError;

pub const CERT_FILE: &str = "certificate.pqcwc-cert";
pub const PRIVATE_FILE: &str = "private.key";
pub const PUBLIC_FILE: &str = "public.key";

pub fn deprecation_warning(alg: HashAlgId) -> Option<String> {
    alg.is_deprecated().then(|| {
        format!(
            "warning: {alg} is deprecated (practical collisions are known); use it for comparison only"
        )
    })
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn is_armored(bytes: &[u8]) -> bool {
    bytes.trim_ascii_start().starts_with(b"-----BEGIN")
}

fn render(bytes: Vec<u8>, armor: bool) -> Vec<u8> {
    if armor {
        keyfile::armor(&bytes).into_bytes()
    } else {
        bytes
    }
}

fn rng_from(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn load_key(path: &Path, role: KeyRole) -> Result<(KeySequence, bool), CliError> {
    let raw = keyfile::read_bytes(&read(path)?)?;
    let (key, used) = keyfile::decode_key(&raw)?;
    if key.role() != role {
        return Err(CliError::Malformed(format!(
            "{} holds a {} key, expected {}",
            path.display(),
            key.role().as_str(),
            role.as_str()
        )));
    }
    Ok((key, used))
}

#[derive(Debug, Clone)]
pub struct KeygenArgs {
    pub alg: HashAlgId,
    pub w1: u8,
    pub w2: u8,
    /// Fixed 32-byte seed; drawn from the OS when absent.
    pub seed: Option<[u8; 32]>,
    pub private_out: PathBuf,
    pub public_out: PathBuf,
    pub armor: bool,
}

pub fn cmd_keygen(args: &KeygenArgs) -> Result<Vec<String>, CliError> {
    let params = ChainParams::new(args.alg, args.w1, args.w2)?;
    let seed = args.seed.unwrap_or_else(|| {
        let mut s = [0u8; 32];
        ChaCha20Rng::from_entropy().fill_bytes(&mut s);
        s
    });
    let (sk, pk) = pqcwc::generate_keypair(&seed, &params)?;
    write(
        &args.private_out,
        &render(keyfile::encode_key(&sk, false), args.armor),
    )?;
    write(
        &args.public_out,
        &render(keyfile::encode_key(&pk, false), args.armor),
    )?;
    Ok(deprecation_warning(args.alg).into_iter().collect())
}

/// Marks the key file used before signing, so a crash never leaves a
/// spent key looking fresh. Signing with a key already marked used is
/// refused unless `allow_reuse` is set.
pub fn cmd_sign(
    key_path: &Path,
    message_path: &Path,
    signature_out: &Path,
    allow_reuse: bool,
    armor: bool,
) -> Result<Vec<String>, CliError> {
    let original = read(key_path)?;
    let armored_key = is_armored(&original);
    let (sk, used) = load_key(key_path, KeyRole::Private)?;
    let mut warnings: Vec<String> = deprecation_warning(sk.params().alg()).into_iter().collect();
    if used {
        let msg = format!(
            "{} was already used to sign; a second signature leaks enough chain values to forge",
            key_path.display()
        );
        if !allow_reuse {
            return Err(CliError::Protocol(msg));
        }
        warnings.push(format!("warning: {msg}"));
    }
    let message = read(message_path)?;
    write(
        key_path,
        &render(keyfile::encode_key(&sk, true), armored_key),
    )?;
    let sig = pqcwc::sign(&sk, &message, sk.params())?;
    write(
        signature_out,
        &render(keyfile::encode_signature(&sig), armor),
    )?;
    warnings.push(format!(
        "note: {} is now marked used; it must not sign again",
        key_path.display()
    ));
    Ok(warnings)
}

/// Where the verifying key comes from.
#[derive(Debug, Clone)]
pub enum VerifyKey {
    PublicKey(PathBuf),
    Certificate(PathBuf),
}

/// `Ok(true)` valid, `Ok(false)` well-formed but invalid.
pub fn cmd_verify(
    key: &VerifyKey,
    message_path: &Path,
    signature_path: &Path,
) -> Result<bool, CliError> {
    let pk = match key {
        VerifyKey::PublicKey(p) => load_key(p, KeyRole::Public)?.0,
        VerifyKey::Certificate(p) => decode_certificate(&read(p)?)?.public_key,
    };
    let sig_raw = keyfile::read_bytes(&read(signature_path)?)?;
    let sig = match keyfile::decode(&sig_raw)? {
        StoredObject::Signature(s) => s,
        StoredObject::Key { .. } => {
            return Err(CliError::Malformed(format!(
                "{} holds a key, not a signature",
                signature_path.display()
            )))
        }
    };
    let message = read(message_path)?;
    Ok(pqcwc::verify(&pk, &message, &sig, pk.params())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueModel {
    M1,
    M2,
    Bke,
}

impl std::str::FromStr for IssueModel {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(IssueModel::M1),
            "m2" => Ok(IssueModel::M2),
            "bke" => Ok(IssueModel::Bke),
            _ => Err(CliError::Usage(format!(
                "unknown model {s}; use m1, m2 or bke"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IssueArgs {
    pub model: IssueModel,
    pub alg: HashAlgId,
    pub w1: u8,
    pub w2: u8,
    pub subject_id: String,
    pub permissions: Vec<String>,
    pub not_before: u64,
    pub not_after: u64,
    pub period: u64,
    pub out_dir: PathBuf,
    /// Seeds every random draw of the run, for reproducible output.
    pub seed: Option<u64>,
    pub armor: bool,
}

#[derive(Debug, Clone)]
pub struct IssueOutput {
    pub certificate: AnonymousCertificate,
    pub certificate_path: PathBuf,
    pub private_key_path: PathBuf,
    pub public_key_path: PathBuf,
    pub warnings: Vec<String>,
}

/// Runs the chosen flow between in-process actors and writes the
/// certificate, the expanded private key and the certified public key.
pub fn cmd_issue(args: &IssueArgs) -> Result<IssueOutput, CliError> {
    let params = ChainParams::new(args.alg, args.w1, args.w2)?;
    let grant = PermissionGrant::new(args.permissions.clone(), args.not_before, args.not_after)?;
    let subject = SubjectInfo::new(args.subject_id.clone(), grant);
    let mut rng = rng_from(args.seed);
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);

    let mut sim = IssuanceSimulator::with_test_kem(&mut rng);
    let issued = match args.model {
        IssueModel::M1 => sim.run_model1(&seed, &params, subject)?,
        IssueModel::M2 => sim.run_model2(&seed, &params, subject, &mut rng)?,
        IssueModel::Bke => {
            sim.run_bke(&seed, &params, subject, TimePeriod(args.period), &mut rng)?
                .issued
        }
    };
    if !sim.ca.issuer().verify(&issued.certificate)? {
        return Err(CliError::Protocol(
            "issuer signature does not verify".into(),
        ));
    }

    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;
    let certificate_path = args.out_dir.join(CERT_FILE);
    let private_key_path = args.out_dir.join(PRIVATE_FILE);
    let public_key_path = args.out_dir.join(PUBLIC_FILE);
    write(&certificate_path, &encode_certificate(&issued.certificate))?;
    write(
        &private_key_path,
        &render(keyfile::encode_key(&issued.private_key, false), args.armor),
    )?;
    write(
        &public_key_path,
        &render(
            keyfile::encode_key(&issued.certificate.public_key, false),
            args.armor,
        ),
    )?;

    let mut warnings: Vec<String> = deprecation_warning(args.alg).into_iter().collect();
    warnings.push(
        "warning: issuance used the insecure test KEM; key transport is not confidential".into(),
    );
    Ok(IssueOutput {
        certificate: issued.certificate,
        certificate_path,
        private_key_path,
        public_key_path,
        warnings,
    })
}

/// Numbers separated by whitespace or commas. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f64 = tok.parse().map_err(|_| {
                CliError::Malformed(format!("line {}: {tok:?} is not a number", n + 1))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn cmd_ttest(a: &Path, b: &Path) -> Result<TTestResult, CliError> {
    let text = |p: &Path| {
        String::from_utf8(read(p)?)
            .map_err(|_| CliError::Malformed(format!("{} is not UTF-8", p.display())))
    };
    let xs = parse_samples(&text(a)?)?;
    let ys = parse_samples(&text(b)?)?;
    ttest_two_sample(&xs, &ys)
}
