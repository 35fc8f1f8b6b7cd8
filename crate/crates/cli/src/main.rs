//! `totient-gap`: find and prove the smallest solution of φ(Mn + b) < φ(Mn).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use totient_gap::certificate::{check_certificate_text, Certificate, CheckOutcome, Outcome};
use totient_gap::oracle;
use totient_gap::pipeline::{
    load_table, render_big, render_report, run_full_pipeline, with_growing_table, PipelineConfig,
};
use totient_gap::search::{find_smallest_z, SearchProblem};
use totient_gap::verify::{
    verify_inequality, CofactorSizing, VerifyOptions, DEFAULT_BLOCK, DEFAULT_COPRIME_DEPTH,
    DISPLAY_DIGITS,
};
use totient_gap::{CoprimalityContext, Error, ExactRatio};

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_DISPROVEN: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SEARCH: u8 = 10;
const EXIT_VERIFY: u8 = 11;
const EXIT_CHECK_PHASE: u8 = 12;
const EXIT_USAGE: u8 = 64;
const EXIT_DATAERR: u8 = 65;
const EXIT_IOERR: u8 = 74;

#[derive(Parser)]
#[command(name = "totient-gap", version, about)]
struct Cli {
    /// Binary prime table cache, reused across runs.
    #[arg(long, global = true, env = "TOTIENT_GAP_PRIME_CACHE")]
    prime_cache: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the smallest z = residue (mod M) with phi(z)/z below the threshold.
    Search {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Write the below-z candidate ledger as JSON.
        #[arg(long)]
        emit_ledger: Option<PathBuf>,
    },
    /// Search, then prove phi(Mn+b) < phi(Mn) and write a certificate.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        depth: DepthArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a certificate.
    Check { certificate: PathBuf },
    /// Factor-count and phi-ratio bounds for m coprime to the first r primes.
    Bound {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        m: String,
    },
    /// Brute-force scans.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Full pipeline: search, verify, write and re-check the certificate, report.
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        depth: DepthArgs,
        #[arg(long, default_value = "totient-gap-cert.json")]
        out: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print n in full.
        #[arg(long)]
        full_n: bool,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Least n <= limit with phi(a n + b) < phi(c n + d).
    Scan {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
    },
    /// Least z <= limit with z = residue (mod M) and phi(z)/z < threshold.
    SmallestZ {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        limit: u64,
    },
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, default_value_t = 30)]
    modulus: u64,
    #[arg(long, default_value_t = 1)]
    residue: u64,
    #[arg(long, default_value = "4/15", value_parser = parse_ratio)]
    threshold: ExactRatio,
}

#[derive(Args, Clone)]
struct DepthArgs {
    /// Number of leading primes the cofactor is proven coprime to.
    #[arg(long, default_value_t = DEFAULT_COPRIME_DEPTH)]
    coprime_depth: usize,
    /// Primes per gcd block.
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    block: usize,
    /// Size the unfactored cofactor by `n` itself (`sketched-value`) or by
    /// the cofactor (`cofactor`, tighter).
    #[arg(long, default_value = "sketched-value", value_parser = parse_sizing)]
    cofactor_sizing: CofactorSizing,
}

impl DepthArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            coprime_depth: self.coprime_depth,
            block: self.block,
            sizing: self.cofactor_sizing,
        }
    }
}

fn parse_sizing(s: &str) -> Result<CofactorSizing, String> {
    match s {
        "sketched-value" => Ok(CofactorSizing::SketchedValue),
        "cofactor" => Ok(CofactorSizing::Cofactor),
        other => Err(format!(
            "expected `sketched-value` or `cofactor`, got {other:?}"
        )),
    }
}

fn parse_ratio(s: &str) -> Result<ExactRatio, String> {
    ExactRatio::from_str(s).map_err(|e| e.to_string())
}

/// A failure tagged with the exit code of the phase it happened in.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, err: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: err.to_string(),
        }
    }

    /// Invalid arguments are usage errors whatever the phase.
    fn phase(code: u8) -> impl Fn(Error) -> Failure {
        move |err| match err {
            Error::InvalidArgument(_) => Failure::new(EXIT_USAGE, err),
            Error::Io(_) => Failure::new(EXIT_IOERR, err),
            _ => Failure::new(code, err),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn outcome_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Proven => 0,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
        Outcome::Disproven => EXIT_DISPROVEN,
    }
}

fn problem(args: &ProblemArgs) -> Result<SearchProblem, Failure> {
    SearchProblem::new(args.modulus, args.residue, args.threshold.clone())
        .map_err(Failure::phase(EXIT_USAGE))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cache = cli.prime_cache.as_ref();
    match cli.command {
        Command::Search {
            problem: args,
            emit_ledger,
        } => {
            let problem = problem(&args)?;
            let (result, _) = with_growing_table(cache, 8192, |t| find_smallest_z(&problem, t))
                .map_err(Failure::phase(EXIT_SEARCH))?;
            println!("min distinct prime factors: {}", result.t);
            println!(
                "z prime indices: {}",
                totient_gap::pipeline::compress_indices(&result.prime_indices)
            );
            println!("z digits: {}", result.z.to_str_radix(10).len());
            println!("z: {}", render_big(&result.z.to_str_radix(10), 30, false));
            println!("candidates below z: {}", result.ledger.len());
            if let Some(path) = emit_ledger {
                let json = result.ledger_json().map_err(Failure::phase(EXIT_SEARCH))?;
                std::fs::write(&path, json + "\n").map_err(|e| Failure::new(EXIT_IOERR, e))?;
            }
            Ok(0)
        }
        Command::Verify {
            problem: args,
            depth,
            out,
        } => {
            let problem = problem(&args)?;
            let (search, table) =
                with_growing_table(cache, (depth.coprime_depth + 2048).max(8192), |t| {
                    find_smallest_z(&problem, t)
                })
                .map_err(Failure::phase(EXIT_SEARCH))?;
            let (verification, _) = with_growing_table(cache, table.count(), |t| {
                verify_inequality(
                    &search.prime_indices,
                    args.modulus,
                    args.residue,
                    t,
                    &depth.options(),
                )
            })
            .map_err(Failure::phase(EXIT_VERIFY))?;
            let cert = &verification.certificate;
            cert.write(&out).map_err(Failure::phase(EXIT_IOERR))?;
            println!("lhs phi-ratio: {}", cert.lhs_decimal);
            println!("rhs lower bound: {}", cert.rhs_decimal);
            println!("outcome: {}", cert.outcome);
            if cert.outcome == Outcome::Inconclusive {
                eprintln!("hint: the bound was too weak; try a larger --coprime-depth");
            }
            Ok(outcome_code(cert.outcome))
        }
        Command::Check { certificate } => {
            let text =
                std::fs::read_to_string(&certificate).map_err(|e| Failure::new(EXIT_IOERR, e))?;
            let cert = match Certificate::from_json(&text) {
                Ok(c) => c,
                Err(e) => {
                    println!("{}", CheckOutcome::Malformed(e.to_string()));
                    return Ok(EXIT_DATAERR);
                }
            };
            let table = load_table(cache, cert.required_table_size().max(1) + 16)
                .map_err(Failure::phase(EXIT_CHECK_PHASE))?;
            let outcome = check_certificate_text(&text, &table);
            println!("{outcome}");
            Ok(match outcome {
                CheckOutcome::Valid => 0,
                o if o.is_structural() => EXIT_DATAERR,
                _ => EXIT_CHECK_FAILED,
            })
        }
        Command::Bound { r, m } => {
            let m = BigUint::from_str(&m)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("bad --m: {e}")))?;
            let initial = r + m.bits() as usize + 1;
            let ((s, bound), _) = with_growing_table(cache, initial, |t| {
                let ctx = CoprimalityContext::new(r, t)?;
                let s = ctx.max_distinct_factors(&m)?;
                Ok((s, ctx.phi_ratio_lower_bound(s)?))
            })
            .map_err(Failure::phase(EXIT_USAGE))?;
            println!("s: {s}");
            println!(
                "phi-ratio lower bound: {}",
                bound.to_decimal_truncated(DISPLAY_DIGITS)
            );
            println!("exact: {bound}");
            Ok(0)
        }
        Command::Oracle(OracleCommand::Scan { a, b, c, d, limit }) => {
            let found =
                oracle::scan_inequality(a, b, c, d, limit).map_err(Failure::phase(EXIT_USAGE))?;
            match found {
                Some(n) => println!("smallest solution: n = {n}"),
                None => println!("no solution with n <= {limit}"),
            }
            Ok(0)
        }
        Command::Oracle(OracleCommand::SmallestZ {
            problem: args,
            limit,
        }) => {
            let found = oracle::smallest_z_scan(args.modulus, args.residue, &args.threshold, limit)
                .map_err(Failure::phase(EXIT_USAGE))?;
            match found {
                Some(z) => println!("smallest z: {z}"),
                None => println!("no z <= {limit}"),
            }
            Ok(0)
        }
        Command::Run {
            problem: args,
            depth,
            out,
            report,
            full_n,
        } => {
            problem(&args)?;
            let config = PipelineConfig {
                modulus: args.modulus,
                residue: args.residue,
                threshold: args.threshold,
                verify: depth.options(),
                prime_cache: cache.cloned(),
                out: Some(out),
                ..PipelineConfig::default()
            };
            let run = run_full_pipeline(&config).map_err(Failure::phase(EXIT_VERIFY))?;
            let text = render_report(&run.report, full_n);
            print!("{text}");
            if let Some(path) = report {
                std::fs::write(path, &text).map_err(|e| Failure::new(EXIT_IOERR, e))?;
            }
            let outcome = run.report.outcome;
            match (&run.report.check, outcome) {
                (Some(CheckOutcome::Valid), Outcome::Proven) => Ok(0),
                (_, Outcome::Proven) => Err(Failure::new(
                    EXIT_CHECK_PHASE,
                    "fresh certificate failed its own check",
                )),
                (_, other) => {
                    if other == Outcome::Inconclusive {
                        eprintln!("hint: the bound was too weak; try a larger --coprime-depth");
                    }
                    Ok(outcome_code(other))
                }
            }
        }
    }
}
