//! Command-line front end: every verification and scan as a subcommand with
//! CSV or JSON output.
//!
//! Exit codes: 0 on success, 1 when a verification reports a failure or an
//! operation errors (a JSON error object is emitted), 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::decay::{
    block_decompose, decay_scan, derive_constants, fit_decay_exponent, lower_bound_check,
    rajchman_check, verify_half_odd_property, FitModel,
};
use crate::error::{Error, Result};
use crate::normality::{cassels_check, del_partial_sums, run_normality, NormalityOptions};
use crate::rational::RationalArgument;
use crate::report::to_json;
use crate::transform::{mu_hat, DEFAULT_GUARD_BITS};
use crate::weights::WeightSpec;

#[derive(Debug, Parser)]
#[command(
    name = "cointoss",
    version,
    about = "Transform decay and normality toolkit for coin-tossing type measures",
    max_term_width = 100
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for scans and sweeps (default: all cores). Outputs do
    /// not depend on this value.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PhiArg {
    /// Weight function: const:<c> | power:<tau> | logpow:<tau> | geo:<kappa> | table:<path>.
    #[arg(long)]
    phi: String,
}

impl PhiArg {
    fn parse(&self) -> Result<WeightSpec> {
        WeightSpec::parse(&self.phi)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the transform at an exact rational argument.
    Eval {
        #[command(flatten)]
        phi: PhiArg,
        /// Argument as <int> or <int>/<int>.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = DEFAULT_GUARD_BITS)]
        guard_bits: u32,
        #[arg(long, default_value_t = 2)]
        base: u32,
    },
    /// Scan octaves and emit a CSV of moduli against their bounds.
    DecayScan {
        #[command(flatten)]
        phi: PhiArg,
        #[arg(long)]
        m_min: u64,
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value_t = 16)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decompose an integer argument into threshold blocks and verify the
    /// half-odd-integer property at each good index.
    Blocks {
        #[command(flatten)]
        phi: PhiArg,
        /// Integer argument, >= 2.
        #[arg(long)]
        t: String,
        /// Threshold exponent; defaults to the classified weight's value.
        #[arg(long = "K")]
        k: Option<f64>,
    },
    /// Verify the constant transform floor along powers of a base >= 3.
    Rajchman {
        #[command(flatten)]
        phi: PhiArg,
        #[arg(long)]
        a: u32,
        #[arg(long, default_value_t = 12)]
        k_max: u32,
    },
    /// Verify the lower envelope at powers of two.
    LowerBound {
        #[command(flatten)]
        phi: PhiArg,
        #[arg(long, default_value_t = 0)]
        m_min: u64,
        #[arg(long)]
        m_max: u64,
    },
    /// Run the per-seed normality battery.
    Normality {
        #[command(flatten)]
        phi: PhiArg,
        /// Binary digits per sampled point.
        #[arg(long, default_value_t = 1 << 15)]
        digits: usize,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Digits discarded before frequency statistics.
        #[arg(long, default_value_t = 64)]
        burn_in: usize,
        /// Largest base-2 block length tested.
        #[arg(long, default_value_t = 3)]
        block_len: u32,
        /// Terms per exponential sum.
        #[arg(long = "N", default_value_t = 1 << 10)]
        n: usize,
    },
    /// Exponential-sum average over the orbit of a sampled point or an
    /// exact rational.
    Weyl {
        /// Weight to sample from (with --seed/--digits); omit when --t is
        /// given.
        #[arg(long)]
        phi: Option<String>,
        /// Exact rational point in [0, 1) (replaces sampling).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 15)]
        digits: usize,
        #[arg(long)]
        b: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        h: i64,
        #[arg(long = "N", default_value_t = 1 << 10)]
        n: usize,
    },
    /// Partial sums of transform moduli along h * b^n with their growth
    /// exponent.
    Del {
        #[command(flatten)]
        phi: PhiArg,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        h: i64,
        #[arg(long)]
        b: u32,
        #[arg(long = "N")]
        n: usize,
    },
    /// Verify the residue-string bijection for odd bases with l >= 2.
    Cassels {
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        h: i64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        r: u32,
    },
    /// Print the decay-envelope constants of a classified weight.
    Constants {
        #[command(flatten)]
        phi: PhiArg,
    },
}

/// Classification horizon used when a subcommand needs a case tag.
const CLASSIFY_HORIZON: u64 = 64;

#[derive(Serialize)]
struct EvalOutput {
    t: String,
    re: f64,
    im: f64,
    modulus: f64,
    trunc_bound: f64,
}

#[derive(Serialize)]
struct ErrorOutput {
    error: String,
}

#[derive(Serialize)]
struct WeylOutput {
    b: u32,
    h: i64,
    terms_used: usize,
    valid: bool,
    re: f64,
    im: f64,
    modulus: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct DelOutput {
    h: i64,
    b: u32,
    n: usize,
    fitted_exponent: f64,
    sums: Vec<f64>,
}

/// Parses `argv` and runs the command, writing to `--out` or stdout.
/// Returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits 2 on usage errors, 0 on --help/--version
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };

    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(threads) = cli.threads {
            builder = builder.num_threads(threads);
        }
        match builder.build() {
            Ok(pool) => pool,
            Err(err) => {
                eprintln!("cannot build thread pool: {err}");
                return 1;
            }
        }
    };

    let (body, failed) = match pool.install(|| execute(&cli.command)) {
        Ok((body, verified)) => (body, !verified),
        Err(err) => (
            to_json(&ErrorOutput {
                error: err.to_string(),
            }),
            true,
        ),
    };

    let mut text = body;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(Error::from),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Error::from),
    };
    if let Err(err) = written {
        eprintln!("cannot write output: {err}");
        return 1;
    }
    i32::from(failed)
}

/// Runs one subcommand, returning its rendered output and whether every
/// verification it performed passed.
fn execute(command: &Command) -> Result<(String, bool)> {
    match command {
        Command::Eval {
            phi,
            t,
            guard_bits,
            base,
        } => {
            let spec = phi.parse()?;
            let t: RationalArgument = t.parse()?;
            let value = mu_hat(&spec, &t, *guard_bits, *base)?;
            let output = EvalOutput {
                t: t.to_string(),
                re: value.value.re,
                im: value.value.im,
                modulus: value.value.norm(),
                trunc_bound: value.truncation_bound,
            };
            Ok((to_json(&output), true))
        }
        Command::DecayScan {
            phi,
            m_min,
            m_max,
            samples,
            seed,
        } => {
            let spec = phi.parse()?;
            let table = decay_scan(&spec, *m_min, *m_max, *samples, *seed)?;
            Ok((table.to_csv(), true))
        }
        Command::Blocks { phi, t, k } => {
            let spec = phi.parse()?;
            let t: RationalArgument = t.parse()?;
            if !t.is_integer() || t.is_negative() {
                return Err(Error::PreconditionViolation(format!(
                    "blocks needs an integer argument >= 2, got {t}"
                )));
            }
            let k_phi = match k {
                Some(k) => *k,
                None => derive_constants(&spec, spec.classify_ratio(CLASSIFY_HORIZON))?.k_phi,
            };
            let decomp = block_decompose(t.numer().magnitude(), k_phi);
            let half_odd = verify_half_odd_property(&decomp);
            let pass = half_odd.pass;

            #[derive(Serialize)]
            struct BlocksOutput {
                t: String,
                k_phi: f64,
                m: u64,
                members: Vec<u64>,
                blocks: Vec<crate::decay::Block>,
                member_count: u64,
                good_block_count: u64,
                half_odd_property: crate::decay::HalfOddReport,
            }
            let output = BlocksOutput {
                t: t.to_string(),
                k_phi: decomp.k_phi,
                m: decomp.m,
                members: decomp
                    .membership
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &b)| b.then_some(i as u64 + 1))
                    .collect(),
                blocks: decomp.blocks.clone(),
                member_count: decomp.member_count,
                good_block_count: decomp.good_block_count,
                half_odd_property: half_odd,
            };
            Ok((to_json(&output), pass))
        }
        Command::Rajchman { phi, a, k_max } => {
            let spec = phi.parse()?;
            let report = rajchman_check(&spec, *a, *k_max)?;
            let pass = report.pass;
            Ok((to_json(&report), pass))
        }
        Command::LowerBound { phi, m_min, m_max } => {
            let spec = phi.parse()?;
            if m_min > m_max {
                return Err(Error::PreconditionViolation(format!(
                    "need m_min <= m_max, got {m_min}..{m_max}"
                )));
            }
            let rows: Vec<_> = (*m_min..=*m_max)
                .map(|m| lower_bound_check(&spec, m))
                .collect();
            let pass = rows.iter().all(|r| r.check.pass);
            #[derive(Serialize)]
            struct LowerBoundOutput {
                pass: bool,
                rows: Vec<crate::decay::BoundReport>,
            }
            Ok((to_json(&LowerBoundOutput { pass, rows }), pass))
        }
        Command::Normality {
            phi,
            digits,
            seed,
            seeds,
            burn_in,
            block_len,
            n,
        } => {
            let spec = phi.parse()?;
            if *seeds < 1 {
                return Err(Error::PreconditionViolation(
                    "need at least one seed".into(),
                ));
            }
            let seed_list: Vec<u64> = (*seed..seed + seeds).collect();
            let options = NormalityOptions {
                digits: *digits,
                burn_in: *burn_in,
                block_lens: (1..=*block_len).collect(),
                weyl_terms: *n,
                ..NormalityOptions::default()
            };
            let report = run_normality(&spec, &seed_list, &options)?;
            let pass = report.pass;
            Ok((to_json(&report), pass))
        }
        Command::Weyl {
            phi,
            t,
            seed,
            digits,
            b,
            h,
            n,
        } => {
            let sum = match (phi, t) {
                (_, Some(t)) => {
                    let x: RationalArgument = t.parse()?;
                    crate::normality::weyl_sum_rational(&x, *b, *h, *n)
                }
                (Some(phi), None) => {
                    let spec = WeightSpec::parse(phi)?;
                    let point = crate::normality::sample_point(&spec, *digits, *seed);
                    crate::normality::weyl_sum_point(&point, *b, *h, *n)
                }
                (None, None) => {
                    return Err(Error::PreconditionViolation(
                        "weyl needs either --phi (sampled point) or --t (exact rational)".into(),
                    ))
                }
            };
            let modulus = sum.value.norm();
            let threshold = 5.0 / (sum.terms_used.max(1) as f64).sqrt();
            let pass = modulus <= threshold;
            let output = WeylOutput {
                b: *b,
                h: *h,
                terms_used: sum.terms_used,
                valid: sum.valid,
                re: sum.value.re,
                im: sum.value.im,
                modulus,
                threshold,
                pass,
            };
            Ok((to_json(&output), pass))
        }
        Command::Del { phi, h, b, n } => {
            let spec = phi.parse()?;
            let diag = del_partial_sums(&spec, *h, *b, *n)?;
            let output = DelOutput {
                h: *h,
                b: *b,
                n: *n,
                fitted_exponent: diag.fitted_exponent,
                sums: diag.sums,
            };
            Ok((to_json(&output), true))
        }
        Command::Cassels { h, b, r } => {
            let report = cassels_check(*h, *b, *r)?;
            let pass = report.pass;
            Ok((to_json(&report), pass))
        }
        Command::Constants { phi } => {
            let spec = phi.parse()?;
            let consts = derive_constants(&spec, spec.classify_ratio(CLASSIFY_HORIZON))?;
            Ok((to_json(&consts), true))
        }
    }
}

/// Convenience for tests: run a scan and fit in one call.
pub fn scan_and_fit(
    spec: &WeightSpec,
    m_min: u64,
    m_max: u64,
    samples: u64,
    seed: u64,
    model: FitModel,
) -> Result<f64> {
    let table = decay_scan(spec, m_min, m_max, samples, seed)?;
    fit_decay_exponent(&table, model)
}
