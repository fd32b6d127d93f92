//! Signature-length table.

use pqcwc::{list_algorithms, ChainParams, HashAlgId};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthRow {
    pub alg: HashAlgId,
    pub hash_bits: usize,
    pub w1: u8,
    pub m: usize,
    pub signature_bits: usize,
}

pub const TABLE_HEADER: &str = "algorithm,hash_bits,w1,m,signature_bits";

/// Published lengths for w1 = 8 and w1 = 16, in algorithm order.
/// Columns: hash bits, m, signature bits.
pub const GOLDEN_W1_8: [(&str, usize, usize, usize); 12] = [
    ("SHA-1", 160, 32, 5120),
    ("SHA-224", 224, 32, 7168),
    ("SHA-256", 256, 32, 8192),
    ("SHA-384", 384, 32, 12288),
    ("SHA-512", 512, 32, 16384),
    ("SHA3-224", 224, 32, 7168),
    ("SHA3-256", 256, 32, 8192),
    ("SHA3-384", 384, 32, 12288),
    ("SHA3-512", 512, 32, 16384),
    ("BLAKE2-256", 256, 32, 8192),
    ("BLAKE2-384", 384, 32, 12288),
    ("BLAKE2-512", 512, 32, 16384),
];

pub const GOLDEN_W1_16: [(&str, usize, usize, usize); 12] = [
    ("SHA-1", 160, 16, 2560),
    ("SHA-224", 224, 16, 3584),
    ("SHA-256", 256, 16, 4096),
    ("SHA-384", 384, 16, 6144),
    ("SHA-512", 512, 16, 8192),
    ("SHA3-224", 224, 16, 3584),
    ("SHA3-256", 256, 16, 4096),
    ("SHA3-384", 384, 16, 6144),
    ("SHA3-512", 512, 16, 8192),
    ("BLAKE2-256", 256, 16, 4096),
    ("BLAKE2-384", 384, 16, 6144),
    ("BLAKE2-512", 512, 16, 8192),
];

pub fn golden(w1: u8) -> Option<&'static [(&'static str, usize, usize, usize); 12]> {
    match w1 {
        8 => Some(&GOLDEN_W1_8),
        16 => Some(&GOLDEN_W1_16),
        _ => None,
    }
}

/// Rows computed from the parameter set. The signature size is `m` digests.
pub fn length_rows(w1: u8) -> Result<Vec<LengthRow>, CliError> {
    if w1 != 8 && w1 != 16 {
        return Err(CliError::Usage(format!(
            "table-lengths needs w1 of 8 or 16, got {w1}"
        )));
    }
    list_algorithms()
        .into_iter()
        .map(|alg| {
            let p = ChainParams::new(alg, w1, 1)?;
            Ok(LengthRow {
                alg,
                hash_bits: alg.digest_bits(),
                w1,
                m: p.m(),
                signature_bits: p.signature_bits(),
            })
        })
        .collect()
}

pub fn render_lengths(rows: &[LengthRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.alg.name(),
            r.hash_bits,
            r.w1,
            r.m,
            r.signature_bits
        ));
    }
    out
}

pub fn cmd_table_lengths(w1: u8) -> Result<String, CliError> {
    Ok(render_lengths(&length_rows(w1)?))
}
