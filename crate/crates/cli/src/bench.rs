//! Timing harness for key generation, both expansion models, and signing
//! and verification under original and expanded keys.
//!
//! Cells run one after another on the calling thread. A cell is one
//! (algorithm, operation) pair: 10 untimed warm-up calls, then one timed
//! call per iteration. Every operation times the whole key sequence unless
//! `per_element` is set, in which case durations are divided by `m`.

use std::fmt::Write as _;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use pqcwc::{
    derive_expansion_vector, expand_private_model1, expand_private_model2, expand_public_model1,
    expand_public_model2, generate_keypair, sign_digest, verify_digest, ChainParams, Error,
    HashAlgId, KeySequence, Signature,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::stats::{summarize, ttest_two_sample, Summary, TTestResult};
use crate::CliError;

pub const SEED_ENV: &str = "PQCWC_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;
pub const WARMUP_ITERATIONS: usize = 10;

pub const SAMPLE_HEADER: &str = "algorithm,operation,iteration,duration_ms";
pub const SUMMARY_HEADER: &str = "algorithm,operation,n,mean_ms,median_ms,min_ms,max_ms,stddev_ms";
pub const TTEST_HEADER: &str = "family,a,b,t_value,df,significant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    Keygen,
    ExpandM1,
    ExpandM2,
    SignOrig,
    SignM1,
    SignM2,
    VerifyOrig,
    VerifyM1,
    VerifyM2,
}

impl Operation {
    /// Execution order within an algorithm.
    pub const ALL: [Operation; 9] = [
        Operation::Keygen,
        Operation::ExpandM1,
        Operation::ExpandM2,
        Operation::SignOrig,
        Operation::SignM1,
        Operation::SignM2,
        Operation::VerifyOrig,
        Operation::VerifyM1,
        Operation::VerifyM2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Keygen => "keygen",
            Operation::ExpandM1 => "expand_m1",
            Operation::ExpandM2 => "expand_m2",
            Operation::SignOrig => "sign_orig",
            Operation::SignM1 => "sign_m1",
            Operation::SignM2 => "sign_m2",
            Operation::VerifyOrig => "verify_orig",
            Operation::VerifyM1 => "verify_m1",
            Operation::VerifyM2 => "verify_m2",
        }
    }
}

impl FromStr for Operation {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown operation {s}")))
    }
}

/// Operation triples compared pairwise by the t-test.
pub const FAMILIES: [(&str, [Operation; 3]); 3] = [
    (
        "keygen",
        [Operation::Keygen, Operation::ExpandM1, Operation::ExpandM2],
    ),
    (
        "sign",
        [Operation::SignOrig, Operation::SignM1, Operation::SignM2],
    ),
    (
        "verify",
        [
            Operation::VerifyOrig,
            Operation::VerifyM1,
            Operation::VerifyM2,
        ],
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub algorithms: Vec<HashAlgId>,
    pub w1: u8,
    pub w2: u8,
    pub iterations: usize,
    pub seed: u64,
    pub warmup: usize,
    pub per_element: bool,
    /// Cells to time. Skipped operations still produce the keys later cells
    /// need, untimed. Order always follows [`Operation::ALL`].
    pub operations: Vec<Operation>,
}

impl BenchConfig {
    /// All twelve algorithms, default iteration count for `w1`.
    pub fn new(w1: u8, w2: u8) -> Self {
        Self {
            algorithms: pqcwc::list_algorithms(),
            w1,
            w2,
            iterations: Self::default_iterations(w1),
            seed: DEFAULT_SEED,
            warmup: WARMUP_ITERATIONS,
            per_element: false,
            operations: Operation::ALL.to_vec(),
        }
    }

    /// 1000 at w1 = 8. A w1 = 16 chain is 257 times longer, so 100.
    pub fn default_iterations(w1: u8) -> usize {
        if w1 >= 16 {
            100
        } else {
            1000
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.w1 != 8 && self.w1 != 16 {
            return Err(CliError::Usage(format!(
                "bench needs w1 of 8 or 16, got {}",
                self.w1
            )));
        }
        if self.iterations < 2 {
            return Err(CliError::Usage("bench needs at least 2 iterations".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Usage("no algorithms selected".into()));
        }
        if self.operations.is_empty() {
            return Err(CliError::Usage("no operations selected".into()));
        }
        for &alg in &self.algorithms {
            ChainParams::new(alg, self.w1, self.w2)?;
        }
        Ok(())
    }
}

/// Reads `PQCWC_SEED` if set, else returns `fallback`.
pub fn seed_from_env(fallback: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}

/// Inputs for one iteration, shared by every algorithm and every key model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationInput {
    pub key_seed: [u8; 32],
    pub expansion_seed: [u8; 32],
    pub digest: [u8; 32],
}

pub fn iteration_inputs(seed: u64, n: usize) -> Vec<IterationInput> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut input = IterationInput {
                key_seed: [0; 32],
                expansion_seed: [0; 32],
                digest: [0; 32],
            };
            rng.fill_bytes(&mut input.key_seed);
            rng.fill_bytes(&mut input.expansion_seed);
            rng.fill_bytes(&mut input.digest);
            input
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSample {
    pub operation: Operation,
    pub alg: HashAlgId,
    pub iteration: usize,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub alg: HashAlgId,
    pub operation: Operation,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyTest {
    pub family: &'static str,
    pub a: Operation,
    pub b: Operation,
    pub result: TTestResult,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub samples: Vec<BenchSample>,
    pub summaries: Vec<CellSummary>,
}

impl BenchReport {
    pub fn cell(&self, alg: HashAlgId, op: Operation) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|c| c.alg == alg && c.operation == op)
            .map(|c| &c.summary)
    }

    /// Per-algorithm means of `op`, in configured algorithm order.
    pub fn means(&self, op: Operation) -> Vec<f64> {
        self.config
            .algorithms
            .iter()
            .filter_map(|&alg| self.cell(alg, op).map(|s| s.mean))
            .collect()
    }

    /// Pairwise tests over per-algorithm means within each family. Empty
    /// when fewer than two algorithms ran.
    pub fn family_ttests(&self) -> Vec<FamilyTest> {
        let mut out = Vec::new();
        for (family, ops) in FAMILIES {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                if let Ok(result) = ttest_two_sample(&self.means(ops[i]), &self.means(ops[j])) {
                    out.push(FamilyTest {
                        family,
                        a: ops[i],
                        b: ops[j],
                        result,
                    });
                }
            }
        }
        out
    }

    /// Sample block, summary block and t-test block, each with its own
    /// header and separated by a blank line.
    pub fn to_csv(&self, include_samples: bool) -> String {
        let mut out = String::new();
        if include_samples {
            out.push_str(SAMPLE_HEADER);
            out.push('\n');
            for s in &self.samples {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6}",
                    s.alg.name(),
                    s.operation.name(),
                    s.iteration,
                    s.duration_ms
                );
            }
            out.push('\n');
        }
        out.push_str(SUMMARY_HEADER);
        out.push('\n');
        for c in &self.summaries {
            let s = &c.summary;
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                c.alg.name(),
                c.operation.name(),
                s.n,
                s.mean,
                s.median,
                s.min,
                s.max,
                s.stddev
            );
        }
        let tests = self.family_ttests();
        if !tests.is_empty() {
            out.push('\n');
            out.push_str(TTEST_HEADER);
            out.push('\n');
            for t in tests {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.4},{},{}",
                    t.family,
                    t.a.name(),
                    t.b.name(),
                    t.result.t_value,
                    t.result.df,
                    t.result.significant
                );
            }
        }
        out
    }
}

/// Per-iteration material for one algorithm, filled in cell by cell.
struct Keys {
    private: Vec<KeySequence>,
    public: Vec<KeySequence>,
}

/// Timing for one cell, or `None` to run it untimed without warm-up.
#[derive(Clone, Copy)]
struct CellTiming {
    warmup: usize,
    scale: f64,
}

fn time_cell<T>(
    inputs: &[IterationInput],
    timing: Option<CellTiming>,
    mut op: impl FnMut(usize, &IterationInput) -> Result<T, Error>,
    mut record: impl FnMut(usize, Option<f64>, T),
) -> Result<(), Error> {
    let Some(t) = timing else {
        for (i, input) in inputs.iter().enumerate() {
            record(i, None, op(i, input)?);
        }
        return Ok(());
    };
    for i in 0..t.warmup {
        black_box(op(i % inputs.len(), &inputs[i % inputs.len()])?);
    }
    for (i, input) in inputs.iter().enumerate() {
        let start = Instant::now();
        let out = black_box(op(i, input)?);
        let elapsed = start.elapsed().as_secs_f64() * 1000.0 / t.scale;
        record(i, Some(elapsed), out);
    }
    Ok(())
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, CliError> {
    run_bench_with_progress(config, |_, _| {})
}

/// Runs every cell in order, calling `progress` before each one.
pub fn run_bench_with_progress(
    config: &BenchConfig,
    mut progress: impl FnMut(HashAlgId, Operation),
) -> Result<BenchReport, CliError> {
    config.validate()?;
    let n = config.iterations;
    let mut inputs = iteration_inputs(config.seed, n);
    let mut samples = Vec::with_capacity(config.algorithms.len() * 9 * n);

    for &alg in &config.algorithms {
        let params = ChainParams::new(alg, config.w1, config.w2)?;
        let scale = if config.per_element {
            params.m() as f64
        } else {
            1.0
        };
        let timed = |op: Operation| {
            config.operations.contains(&op).then_some(CellTiming {
                warmup: config.warmup,
                scale,
            })
        };
        let needs_verify = [
            Operation::VerifyOrig,
            Operation::VerifyM1,
            Operation::VerifyM2,
        ]
        .iter()
        .any(|op| config.operations.contains(op));

        // An all-zero vector cannot expand anything; redraw such seeds
        // before timing so the timed derivation never fails.
        for input in inputs.iter_mut() {
            while matches!(
                derive_expansion_vector(&input.expansion_seed, params.m(), params.w2()),
                Err(Error::DegenerateSeed)
            ) {
                input.expansion_seed = pqcwc::hash(pqcwc::HashAlgId::Sha256, &input.expansion_seed)
                    .as_bytes()
                    .try_into()
                    .expect("32-byte digest");
            }
        }
        let inputs = &inputs[..];
        let mut push = |op: Operation, i: usize, d: Option<f64>| {
            if let Some(d) = d {
                samples.push(BenchSample {
                    operation: op,
                    alg,
                    iteration: i,
                    duration_ms: d,
                })
            }
        };
        let mut announce = |op: Operation| {
            if config.operations.contains(&op) {
                progress(alg, op);
            }
        };

        announce(Operation::Keygen);
        let mut orig = Keys {
            private: Vec::with_capacity(n),
            public: Vec::with_capacity(n),
        };
        time_cell(
            inputs,
            timed(Operation::Keygen),
            |_, inp| generate_keypair(&inp.key_seed, &params),
            |i, d, (sk, pk)| {
                push(Operation::Keygen, i, d);
                orig.private.push(sk);
                orig.public.push(pk);
            },
        )?;

        announce(Operation::ExpandM1);
        let mut m1 = Keys {
            private: Vec::with_capacity(n),
            public: Vec::with_capacity(n),
        };
        time_cell(
            inputs,
            timed(Operation::ExpandM1),
            |i, _| expand_private_model1(&orig.private[i], &params),
            |i, d, sk| {
                push(Operation::ExpandM1, i, d);
                m1.private.push(sk);
            },
        )?;

        announce(Operation::ExpandM2);
        let mut m2 = Keys {
            private: Vec::with_capacity(n),
            public: Vec::with_capacity(n),
        };
        let mut vectors = Vec::with_capacity(n);
        time_cell(
            inputs,
            timed(Operation::ExpandM2),
            |i, inp| {
                let ev = derive_expansion_vector(&inp.expansion_seed, params.m(), params.w2())?;
                let sk = expand_private_model2(&orig.private[i], &ev)?;
                Ok((sk, ev))
            },
            |i, d, (sk, ev)| {
                push(Operation::ExpandM2, i, d);
                m2.private.push(sk);
                vectors.push(ev);
            },
        )?;

        // Untimed: the verifier side of each expanded pair.
        for i in (0..n).filter(|_| needs_verify) {
            m1.public
                .push(expand_public_model1(&orig.public[i], &params)?);
            m2.public
                .push(expand_public_model2(&orig.public[i], &vectors[i])?);
        }

        let mut signatures: [Vec<Signature>; 3] = Default::default();
        let models = [&orig, &m1, &m2];
        for (k, op) in [Operation::SignOrig, Operation::SignM1, Operation::SignM2]
            .into_iter()
            .enumerate()
        {
            announce(op);
            let keys = models[k];
            let sigs = &mut signatures[k];
            time_cell(
                inputs,
                timed(op),
                |i, inp| sign_digest(&keys.private[i], &inp.digest, &params),
                |i, d, sig| {
                    push(op, i, d);
                    sigs.push(sig);
                },
            )?;
        }

        for (k, op) in [
            Operation::VerifyOrig,
            Operation::VerifyM1,
            Operation::VerifyM2,
        ]
        .into_iter()
        .enumerate()
        .filter(|(_, op)| config.operations.contains(op))
        {
            announce(op);
            let keys = models[k];
            let sigs = &signatures[k];
            let mut failed = None;
            time_cell(
                inputs,
                timed(op),
                |i, inp| verify_digest(&keys.public[i], &inp.digest, &sigs[i], &params),
                |i, d, ok| {
                    push(op, i, d);
                    if !ok && failed.is_none() {
                        failed = Some(i);
                    }
                },
            )?;
            if let Some(i) = failed {
                return Err(CliError::Protocol(format!(
                    "{alg} {}: signature {i} did not verify",
                    op.name()
                )));
            }
        }
    }

    let summaries = config
        .algorithms
        .iter()
        .flat_map(|&alg| {
            Operation::ALL
                .into_iter()
                .filter(|op| config.operations.contains(op))
                .map(move |op| (alg, op))
        })
        .map(|(alg, op)| {
            let xs: Vec<f64> = samples
                .iter()
                .filter(|s| s.alg == alg && s.operation == op)
                .map(|s| s.duration_ms)
                .collect();
            CellSummary {
                alg,
                operation: op,
                summary: summarize(&xs).expect("at least two iterations"),
            }
        })
        .collect();

    Ok(BenchReport {
        config: config.clone(),
        samples,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algs: Vec<HashAlgId>) -> BenchConfig {
        BenchConfig {
            algorithms: algs,
            iterations: 3,
            warmup: 1,
            ..BenchConfig::new(8, 4)
        }
    }

    #[test]
    fn defaults() {
        assert_eq!(BenchConfig::new(8, 8).iterations, 1000);
        assert_eq!(BenchConfig::new(16, 8).iterations, 100);
        assert_eq!(BenchConfig::new(8, 8).algorithms.len(), 12);
        assert_eq!(BenchConfig::new(8, 8).warmup, WARMUP_ITERATIONS);
    }

    #[test]
    fn validation() {
        let mut c = small(vec![HashAlgId::Sha256]);
        c.iterations = 1;
        assert!(c.validate().is_err());
        c.iterations = 2;
        assert!(c.validate().is_ok());
        c.w1 = 4;
        assert!(c.validate().is_err());
        c.w1 = 8;
        c.w2 = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn inputs_are_reproducible() {
        assert_eq!(iteration_inputs(7, 5), iteration_inputs(7, 5));
        assert_ne!(iteration_inputs(7, 5), iteration_inputs(8, 5));
    }

    #[test]
    fn operation_names_round_trip() {
        for op in Operation::ALL {
            assert_eq!(op.name().parse::<Operation>().unwrap(), op);
        }
    }

    #[test]
    fn report_shape_and_order() {
        let algs = vec![HashAlgId::Blake2_256, HashAlgId::Sha1];
        let mut seen = Vec::new();
        let report =
            run_bench_with_progress(&small(algs.clone()), |a, op| seen.push((a, op))).unwrap();
        let expected: Vec<_> = algs
            .iter()
            .flat_map(|&a| Operation::ALL.into_iter().map(move |op| (a, op)))
            .collect();
        assert_eq!(seen, expected);
        assert_eq!(report.samples.len(), 2 * 9 * 3);
        assert_eq!(report.summaries.len(), 2 * 9);
        assert!(report.samples.iter().all(|s| s.duration_ms > 0.0));
        assert_eq!(report.means(Operation::Keygen).len(), 2);
        assert_eq!(report.family_ttests().len(), 9);
    }

    #[test]
    fn csv_layout() {
        let report = run_bench(&small(vec![HashAlgId::Sha256])).unwrap();
        let csv = report.to_csv(true);
        let blocks: Vec<&str> = csv.split("\n\n").collect();
        assert_eq!(blocks.len(), 2, "one algorithm gives no t-test block");
        assert!(blocks[0].starts_with(SAMPLE_HEADER));
        assert_eq!(blocks[0].lines().count(), 1 + 9 * 3);
        assert!(blocks[1].starts_with(SUMMARY_HEADER));
        assert_eq!(blocks[1].lines().count(), 1 + 9);
        for line in blocks[1].lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 8);
            for f in &fields[3..] {
                f.parse::<f64>().unwrap();
            }
        }
        assert!(!report.to_csv(false).contains(SAMPLE_HEADER));
    }

    #[test]
    fn operation_subset() {
        let mut c = small(vec![HashAlgId::Sha224, HashAlgId::Sha3_224]);
        c.operations = vec![Operation::SignM2, Operation::Keygen];
        let mut seen = Vec::new();
        let r = run_bench_with_progress(&c, |_, op| seen.push(op)).unwrap();
        assert_eq!(seen, [Operation::Keygen, Operation::SignM2].repeat(2));
        assert_eq!(r.summaries.len(), 4);
        assert_eq!(r.samples.len(), 2 * 2 * 3);
        assert!(r.cell(HashAlgId::Sha224, Operation::SignM1).is_none());
        assert!(
            r.family_ttests().is_empty(),
            "no family has two timed members"
        );
        c.operations = vec![Operation::SignOrig, Operation::SignM2];
        assert_eq!(run_bench(&c).unwrap().family_ttests().len(), 1);
    }

    #[test]
    fn per_element_divides_by_m() {
        let mut c = small(vec![HashAlgId::Sha256]);
        c.per_element = true;
        let r = run_bench(&c).unwrap();
        assert!(r.samples.iter().all(|s| s.duration_ms > 0.0));
    }
}
