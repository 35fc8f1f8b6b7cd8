//! End-to-end run: search, verification, certificate, report.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::bounds::CoprimalityContext;
use crate::certificate::{check_certificate_text, CheckOutcome, Outcome};
use crate::error::{Error, Result};
use crate::prime_table::PrimeTable;
use crate::ratio::ExactRatio;
use crate::search::{find_smallest_z_with_limits, SearchLimits, SearchProblem, SearchResult};
use crate::verify::{verify_inequality, Verification, VerifyOptions, DISPLAY_DIGITS};

const MIN_TABLE: usize = 8192;
const TABLE_SLACK: usize = 2048;
const MAX_TABLE: usize = 100_000_000;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub modulus: u64,
    pub residue: u64,
    pub threshold: ExactRatio,
    pub verify: VerifyOptions,
    pub prime_cache: Option<PathBuf>,
    /// Where to write the certificate; it is re-read and checked from disk.
    pub out: Option<PathBuf>,
    pub limits: SearchLimits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            modulus: 30,
            residue: 1,
            threshold: ExactRatio::from_u64(4, 15).expect("nonzero denominator"),
            verify: VerifyOptions::default(),
            prime_cache: None,
            out: None,
            limits: SearchLimits::default(),
        }
    }
}

/// A prime table of at least `count` primes, via the cache when configured.
pub fn load_table(cache: Option<&PathBuf>, count: usize) -> Result<PrimeTable> {
    match cache {
        Some(path) => PrimeTable::load_or_build(path, count),
        None => PrimeTable::build(count),
    }
}

/// Runs `f` against a table, doubling the table while `f` runs out of primes.
pub fn with_growing_table<T>(
    cache: Option<&PathBuf>,
    initial: usize,
    mut f: impl FnMut(&PrimeTable) -> Result<T>,
) -> Result<(T, PrimeTable)> {
    let mut count = initial.max(1);
    loop {
        let table = load_table(cache, count)?;
        match f(&table) {
            Err(Error::TableExhausted { .. }) if count < MAX_TABLE => count *= 2,
            other => return other.map(|v| (v, table)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub modulus: u64,
    pub residue: u64,
    pub threshold: String,
    pub r: usize,
    /// Least number of distinct prime factors a solution needs.
    pub t: usize,
    /// Truncated φ-ratio of `p_{r+1} ⋯ p_{r+t−1}`, which is not below the threshold.
    pub q1_decimal: String,
    pub z_prime_indices: Vec<usize>,
    pub z_digits: usize,
    pub candidates_below_z: usize,
    pub lhs_decimal: String,
    pub n: String,
    pub n_small_factors: Vec<(u64, u32)>,
    pub cofactor_digits: usize,
    pub coprime_depth: usize,
    pub s2: usize,
    pub q2_digits: usize,
    pub rhs_decimal: String,
    pub outcome: Outcome,
    pub check: Option<CheckOutcome>,
    pub timings: Vec<(&'static str, Duration)>,
}

#[derive(Debug)]
pub struct PipelineRun {
    pub search: SearchResult,
    pub verification: Verification,
    pub report: RunReport,
}

pub fn run_full_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    let problem = SearchProblem::new(config.modulus, config.residue, config.threshold.clone())?;
    let cache = config.prime_cache.as_ref();
    let initial = (config.verify.coprime_depth + TABLE_SLACK).max(MIN_TABLE);
    let mut timings = Vec::new();

    let clock = Instant::now();
    let (search, table) = with_growing_table(cache, initial, |table| {
        find_smallest_z_with_limits(&problem, table, config.limits)
    })?;
    timings.push(("search", clock.elapsed()));

    let clock = Instant::now();
    let (verification, table) = with_growing_table(cache, table.count(), |table| {
        verify_inequality(
            &search.prime_indices,
            config.modulus,
            config.residue,
            table,
            &config.verify,
        )
    })?;
    timings.push(("verify", clock.elapsed()));

    let check = match &config.out {
        Some(path) => {
            let clock = Instant::now();
            verification.certificate.write(path)?;
            let text = std::fs::read_to_string(path)?;
            let outcome = check_certificate_text(&text, &table);
            timings.push(("check", clock.elapsed()));
            Some(outcome)
        }
        None => None,
    };

    let ctx = CoprimalityContext::new(problem.r(), &table)?;
    let q1 = ctx.phi_ratio_lower_bound(search.t - 1)?;
    let cert = &verification.certificate;
    let report = RunReport {
        modulus: config.modulus,
        residue: config.residue,
        threshold: config.threshold.to_string(),
        r: problem.r(),
        t: search.t,
        q1_decimal: q1.to_decimal_truncated(DISPLAY_DIGITS),
        z_prime_indices: search.prime_indices.clone(),
        z_digits: crate::product::digit_count(&search.z),
        candidates_below_z: search.ledger.len(),
        lhs_decimal: cert.lhs_decimal.clone(),
        n: cert.n.clone(),
        n_small_factors: cert.small_part_factors.clone(),
        cofactor_digits: cert.cofactor_digit_count,
        coprime_depth: cert.coprime_depth,
        s2: cert.s2,
        q2_digits: verification.q2_digits,
        rhs_decimal: cert.rhs_decimal.clone(),
        outcome: cert.outcome,
        check,
        timings,
    };
    Ok(PipelineRun {
        search,
        verification,
        report,
    })
}

/// Groups decimal digits in threes from the right: `1234567` → `1,234,567`.
pub fn group_digits(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Grouped digits, elided to the first and last `keep` digits unless `full`.
pub fn render_big(digits: &str, keep: usize, full: bool) -> String {
    let grouped = group_digits(digits);
    if full || digits.len() <= 2 * keep {
        return grouped;
    }
    let cut = |from_front: bool| {
        let mut seen = 0;
        let mut taken = String::new();
        let chars: Vec<char> = if from_front {
            grouped.chars().collect()
        } else {
            grouped.chars().rev().collect()
        };
        for ch in chars {
            if ch.is_ascii_digit() {
                if seen == keep {
                    break;
                }
                seen += 1;
            }
            taken.push(ch);
        }
        if from_front {
            taken
        } else {
            taken.chars().rev().collect()
        }
    };
    format!("{}...{}", cut(true), cut(false))
}

/// `4..383, 385, 388`
pub fn compress_indices(indices: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < indices.len() {
        let mut j = i;
        while j + 1 < indices.len() && indices[j + 1] == indices[j] + 1 {
            j += 1;
        }
        parts.push(match j - i {
            0 => indices[i].to_string(),
            1 => format!("{}, {}", indices[i], indices[j]),
            _ => format!("{}..{}", indices[i], indices[j]),
        });
        i = j + 1;
    }
    parts.join(", ")
}

fn render_factors(factors: &[(u64, u32)]) -> String {
    if factors.is_empty() {
        return "none".to_string();
    }
    factors
        .iter()
        .map(|&(p, e)| {
            if e == 1 {
                p.to_string()
            } else {
                format!("{p}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join(" * ")
}

pub fn render_report(report: &RunReport, full_n: bool) -> String {
    let mut out = String::new();
    let m = report.modulus;
    let b = report.residue;
    let _ = writeln!(out, "problem: phi({m}n+{b}) < phi({m}n)");
    let _ = writeln!(
        out,
        "search: z = {b} (mod {m}), phi(z)/z < {}, primes p_1..p_{} excluded",
        report.threshold, report.r
    );
    let _ = writeln!(
        out,
        "min distinct prime factors: {} ({} do not suffice)",
        report.t,
        report.t - 1
    );
    let _ = writeln!(
        out,
        "q1 phi-ratio ({} primes): {}",
        report.t - 1,
        report.q1_decimal
    );
    let _ = writeln!(
        out,
        "z prime indices: {}",
        compress_indices(&report.z_prime_indices)
    );
    let _ = writeln!(out, "z digits: {}", report.z_digits);
    let _ = writeln!(out, "candidates below z: {}", report.candidates_below_z);
    let _ = writeln!(out, "lhs phi-ratio: {}", report.lhs_decimal);
    let _ = writeln!(out, "n digits: {}", report.n.len());
    let _ = writeln!(out, "n: {}", render_big(&report.n, 30, full_n));
    let _ = writeln!(
        out,
        "n small factors: {}",
        render_factors(&report.n_small_factors)
    );
    let _ = writeln!(
        out,
        "cofactor: {} digits, coprime to the first {} primes",
        report.cofactor_digits, report.coprime_depth
    );
    let _ = writeln!(out, "s2: {} (q2 digits: {})", report.s2, report.q2_digits);
    let _ = writeln!(out, "rhs lower bound: {}", report.rhs_decimal);
    let _ = writeln!(out, "outcome: {}", report.outcome);
    if let Some(check) = &report.check {
        let _ = writeln!(out, "certificate check: {check}");
    }
    for (phase, elapsed) in &report.timings {
        let _ = writeln!(out, "time {phase}: {:.3}s", elapsed.as_secs_f64());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        assert_eq!(group_digits("1"), "1");
        assert_eq!(group_digits("1234"), "1,234");
        assert_eq!(group_digits("964860"), "964,860");
        assert_eq!(render_big("1234567", 4, false), "1,234,567");
        assert_eq!(render_big("123456789012", 4, false), "123,4...9,012");
        assert_eq!(render_big("123456789012", 4, true), "123,456,789,012");
    }

    #[test]
    fn index_ranges() {
        let mut idx: Vec<usize> = (4..=383).collect();
        idx.extend([385, 388]);
        assert_eq!(compress_indices(&idx), "4..383, 385, 388");
        assert_eq!(compress_indices(&[2, 3]), "2, 3");
        assert_eq!(compress_indices(&[]), "");
    }

    #[test]
    fn small_pipeline_reports_disproof() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            modulus: 2,
            residue: 1,
            threshold: ExactRatio::from_u64(1, 2).unwrap(),
            verify: VerifyOptions::with_depth(100, 10),
            prime_cache: Some(dir.path().join("primes.bin")),
            out: Some(dir.path().join("cert.json")),
            limits: SearchLimits::default(),
        };
        let run = run_full_pipeline(&config).unwrap();
        assert_eq!(run.search.z, 105u32.into());
        assert_eq!(run.report.n, "52");
        assert_eq!(run.report.outcome, Outcome::Disproven);
        assert_eq!(run.report.check, Some(CheckOutcome::NotProven));
        let text = render_report(&run.report, false);
        assert!(text.contains("candidates below z: 0\n"));
        assert!(text.contains("outcome: disproven\n"));
    }

    #[test]
    fn invalid_residue_fails_before_work() {
        let config = PipelineConfig {
            residue: 6,
            ..PipelineConfig::default()
        };
        assert!(matches!(
            run_full_pipeline(&config),
            Err(Error::InvalidArgument(_))
        ));
    }
}
