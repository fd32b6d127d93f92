use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Parser, Subcommand};
use pqcwc::HashAlgId;
use pqcwc_cli::bench::{self, BenchConfig, Operation};
use pqcwc_cli::commands::{self, IssueArgs, IssueModel, KeygenArgs, VerifyKey};
use pqcwc_cli::stats::T_CRITICAL_DF22;
use pqcwc_cli::{tables, CliError};

const WEEK: u64 = 7 * 24 * 3600;

#[derive(Parser)]
#[command(name = "pqcwc", version, about = "Hash-chain anonymous certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print signature lengths for every hash algorithm.
    TableLengths {
        #[arg(long, default_value_t = 8)]
        w1: u8,
    },
    /// Time key generation, expansion, signing and verification.
    Bench {
        #[arg(long, default_value_t = 8)]
        w1: u8,
        /// Defaults to w1.
        #[arg(long)]
        w2: Option<u8>,
        /// Defaults to 1000 at w1=8 and 100 at w1=16.
        #[arg(long)]
        iters: Option<usize>,
        /// Comma-separated names, e.g. SHA-256,BLAKE2-512. Defaults to all.
        #[arg(long, value_delimiter = ',')]
        algs: Vec<HashAlgId>,
        /// Comma-separated subset of keygen, expand_m1, expand_m2,
        /// sign_{orig,m1,m2}, verify_{orig,m1,m2}. Defaults to all.
        #[arg(long, value_delimiter = ',')]
        ops: Vec<Operation>,
        /// Input seed. PQCWC_SEED overrides the default but not this flag.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Divide every duration by m.
        #[arg(long)]
        per_element: bool,
        /// Skip the per-sample block.
        #[arg(long)]
        summary_only: bool,
    },
    /// Generate a one-time key pair.
    Keygen {
        #[arg(long, default_value = "SHA-256")]
        alg: HashAlgId,
        #[arg(long, default_value_t = 8)]
        w1: u8,
        #[arg(long, default_value_t = 8)]
        w2: u8,
        /// 64 hex digits; random when absent.
        #[arg(long)]
        seed_hex: Option<String>,
        #[arg(long)]
        private_out: PathBuf,
        #[arg(long)]
        public_out: PathBuf,
        #[arg(long)]
        armor: bool,
    },
    /// Sign a file. The key file is marked used.
    Sign {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sign even if the key is already marked used.
        #[arg(long)]
        allow_reuse: bool,
        #[arg(long)]
        armor: bool,
    },
    /// Verify a signature. Exit 0 valid, 1 invalid, 2 malformed, 3 IO error.
    #[command(group(ArgGroup::new("verifier").required(true).args(["key", "cert"])))]
    Verify {
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Run an issuance flow in-process and write the certificate and keys.
    Issue {
        #[arg(long)]
        model: IssueModel,
        #[arg(long, default_value = "SHA-256")]
        alg: HashAlgId,
        #[arg(long, default_value_t = 8)]
        w1: u8,
        #[arg(long, default_value_t = 8)]
        w2: u8,
        #[arg(long, default_value = "end-entity")]
        subject: String,
        #[arg(long = "permission", default_values_t = ["general".to_string()])]
        permissions: Vec<String>,
        /// Unix seconds; defaults to now.
        #[arg(long)]
        not_before: Option<u64>,
        /// Unix seconds; defaults to one week after not-before.
        #[arg(long)]
        not_after: Option<u64>,
        /// Time period shared with the RA; defaults to the current week index.
        #[arg(long)]
        period: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        armor: bool,
    },
    /// Pooled two-sample t-test on two files of numbers.
    Ttest {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("{w}");
    }
}

fn parse_seed_hex(s: &str) -> Result<[u8; 32], CliError> {
    let bytes = hex::decode(s.trim()).map_err(|e| CliError::Usage(format!("--seed-hex: {e}")))?;
    bytes.try_into().map_err(|b: Vec<u8>| {
        CliError::Usage(format!("--seed-hex needs 32 bytes, got {}", b.len()))
    })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::TableLengths { w1 } => {
            print!("{}", tables::cmd_table_lengths(w1)?);
        }
        Command::Bench {
            w1,
            w2,
            iters,
            algs,
            ops,
            seed,
            out,
            per_element,
            summary_only,
        } => {
            let mut config = BenchConfig::new(w1, w2.unwrap_or(w1));
            if !algs.is_empty() {
                config.algorithms = algs;
            }
            if !ops.is_empty() {
                config.operations = ops;
            }
            if let Some(n) = iters {
                config.iterations = n;
            }
            config.seed = match seed {
                Some(s) => s,
                None => bench::seed_from_env(bench::DEFAULT_SEED)?,
            };
            config.per_element = per_element;
            config.validate()?;
            for &alg in &config.algorithms {
                warn_all(
                    &commands::deprecation_warning(alg)
                        .into_iter()
                        .collect::<Vec<_>>(),
                );
            }
            eprintln!(
                "bench: {} algorithms, w1={} w2={}, {} iterations, seed {}",
                config.algorithms.len(),
                config.w1,
                config.w2,
                config.iterations,
                config.seed
            );
            let report = bench::run_bench_with_progress(&config, |alg, op| {
                eprintln!("  {alg} {}", op.name());
            })?;
            let csv = report.to_csv(!summary_only);
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?,
                None => std::io::stdout()
                    .write_all(csv.as_bytes())
                    .map_err(|e| CliError::io("<stdout>".as_ref(), e))?,
            }
        }
        Command::Keygen {
            alg,
            w1,
            w2,
            seed_hex,
            private_out,
            public_out,
            armor,
        } => {
            let seed = seed_hex.as_deref().map(parse_seed_hex).transpose()?;
            warn_all(&commands::cmd_keygen(&KeygenArgs {
                alg,
                w1,
                w2,
                seed,
                private_out,
                public_out,
                armor,
            })?);
        }
        Command::Sign {
            key,
            message,
            out,
            allow_reuse,
            armor,
        } => {
            warn_all(&commands::cmd_sign(
                &key,
                &message,
                &out,
                allow_reuse,
                armor,
            )?);
        }
        Command::Verify {
            key,
            cert,
            message,
            sig,
        } => {
            let verifier = match (key, cert) {
                (Some(k), _) => VerifyKey::PublicKey(k),
                (None, Some(c)) => VerifyKey::Certificate(c),
                (None, None) => unreachable!("clap enforces the group"),
            };
            if commands::cmd_verify(&verifier, &message, &sig)? {
                println!("valid");
            } else {
                println!("invalid");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Issue {
            model,
            alg,
            w1,
            w2,
            subject,
            permissions,
            not_before,
            not_after,
            period,
            out_dir,
            seed,
            armor,
        } => {
            let not_before = not_before.unwrap_or_else(now);
            let out = commands::cmd_issue(&IssueArgs {
                model,
                alg,
                w1,
                w2,
                subject_id: subject,
                permissions,
                not_before,
                not_after: not_after.unwrap_or(not_before.saturating_add(WEEK)),
                period: period.unwrap_or_else(|| now() / WEEK),
                out_dir,
                seed,
                armor,
            })?;
            warn_all(&out.warnings);
            println!("certificate   {}", out.certificate_path.display());
            println!("private key   {}", out.private_key_path.display());
            println!("public key    {}", out.public_key_path.display());
            println!(
                "fingerprint   {}",
                hex::encode(out.certificate.compressed_key())
            );
        }
        Command::Ttest { a, b } => {
            let r = commands::cmd_ttest(&a, &b)?;
            println!(
                "t = {:.6}, df = {}, significant = {} (|t| > {T_CRITICAL_DF22})",
                r.t_value, r.df, r.significant
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pqcwc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
