//! Certificate file format and independent replay.
//!
//! A certificate is canonical pretty-printed JSON followed by one newline.
//! Checking parses it, insists on the canonical bytes, then recomputes every
//! derived field from the modulus, residue, prime indices of `z` and the
//! coprimality depth, and finally re-runs the integer comparison.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prime_table::PrimeTable;
use crate::verify::{verify_inequality, CofactorSizing, VerifyOptions, DEFAULT_BLOCK};

pub const CERT_FORMAT: &str = "totient-gap-cert/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `φ(Mn + b) < φ(Mn)` holds.
    Proven,
    /// The bound was too weak to decide.
    Inconclusive,
    /// Exact φ shows the inequality is false.
    Disproven,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Proven => "proven",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Disproven => "disproven",
        })
    }
}

/// `left = φ(z)·D`, `right = N·Mn` for the bound `N/D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalInequality {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: String,
    pub modulus: u64,
    pub residue: u64,
    pub z_prime_indices: Vec<usize>,
    pub n: String,
    pub small_part_factors: Vec<(u64, u32)>,
    pub cofactor_digit_count: usize,
    pub coprime_depth: usize,
    pub cofactor_sizing: CofactorSizing,
    pub s2: usize,
    pub lhs_ratio: crate::ratio::RatioParts,
    pub rhs_bound_ratio: crate::ratio::RatioParts,
    pub lhs_decimal: String,
    pub rhs_decimal: String,
    pub final_inequality: FinalInequality,
    pub outcome: Outcome,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Largest prime index a replay will touch.
    pub fn required_table_size(&self) -> usize {
        let z_max = self.z_prime_indices.iter().copied().max().unwrap_or(0);
        z_max.max(self.coprime_depth + self.s2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Valid,
    /// Not parseable, or not in canonical form.
    Malformed(String),
    /// The stated inputs could not be replayed at all.
    ReplayFailed(String),
    /// A stored field differs from its recomputed value.
    Mismatch(&'static str),
    /// Everything replays, but the inequality is not strict.
    NotProven,
}

impl CheckOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, CheckOutcome::Valid)
    }

    /// Structural corruption, as opposed to a mathematical failure.
    pub fn is_structural(&self) -> bool {
        matches!(self, CheckOutcome::Malformed(_))
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckOutcome::Valid => f.write_str("valid"),
            CheckOutcome::Malformed(m) => write!(f, "malformed certificate: {m}"),
            CheckOutcome::ReplayFailed(m) => write!(f, "replay failed: {m}"),
            CheckOutcome::Mismatch(field) => write!(f, "replay mismatch in field `{field}`"),
            CheckOutcome::NotProven => f.write_str("inequality does not hold strictly"),
        }
    }
}

/// Checks certificate text byte for byte against its replay.
pub fn check_certificate_text(text: &str, table: &PrimeTable) -> CheckOutcome {
    CertificateChecker::new(table).check_text(text)
}

/// Replays a parsed certificate.
pub fn check_certificate(cert: &Certificate, table: &PrimeTable) -> CheckOutcome {
    CertificateChecker::new(table).check(cert)
}

/// What a replay depends on. Everything else in a certificate is derived.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ReplayKey {
    modulus: u64,
    residue: u64,
    z_prime_indices: Vec<usize>,
    coprime_depth: usize,
    sizing: CofactorSizing,
}

impl ReplayKey {
    fn of(cert: &Certificate) -> Self {
        ReplayKey {
            modulus: cert.modulus,
            residue: cert.residue,
            z_prime_indices: cert.z_prime_indices.clone(),
            coprime_depth: cert.coprime_depth,
            sizing: cert.cofactor_sizing,
        }
    }
}

/// Checks many certificates against one table, remembering the most recent
/// replay so that certificates sharing inputs are replayed once.
pub struct CertificateChecker<'a> {
    table: &'a PrimeTable,
    last: Option<(ReplayKey, std::result::Result<Certificate, String>)>,
}

impl<'a> CertificateChecker<'a> {
    pub fn new(table: &'a PrimeTable) -> Self {
        CertificateChecker { table, last: None }
    }

    pub fn check_text(&mut self, text: &str) -> CheckOutcome {
        let cert = match Certificate::from_json(text) {
            Ok(cert) => cert,
            Err(e) => return CheckOutcome::Malformed(e.to_string()),
        };
        match cert.to_json() {
            Ok(canonical) if canonical == text => {}
            Ok(_) => return CheckOutcome::Malformed("not in canonical form".into()),
            Err(e) => return CheckOutcome::Malformed(e.to_string()),
        }
        self.check(&cert)
    }

    pub fn check(&mut self, cert: &Certificate) -> CheckOutcome {
        if cert.format != CERT_FORMAT {
            return CheckOutcome::Malformed(format!("unknown format {:?}", cert.format));
        }
        if cert.z_prime_indices.windows(2).any(|w| w[0] > w[1]) {
            return CheckOutcome::Malformed("z prime indices are not sorted".into());
        }
        let replay = match self.replay(cert) {
            Ok(replay) => replay,
            Err(e) => return CheckOutcome::ReplayFailed(e.clone()),
        };
        if let Some(field) = first_difference(cert, replay) {
            return CheckOutcome::Mismatch(field);
        }
        let parse = |s: &str| BigUint::from_str(s).ok();
        match (
            parse(&cert.final_inequality.left),
            parse(&cert.final_inequality.right),
        ) {
            (Some(l), Some(r)) if l < r && cert.outcome == Outcome::Proven => CheckOutcome::Valid,
            (Some(_), Some(_)) => CheckOutcome::NotProven,
            _ => CheckOutcome::Malformed("final inequality is not a pair of integers".into()),
        }
    }

    fn replay(&mut self, cert: &Certificate) -> &std::result::Result<Certificate, String> {
        let key = ReplayKey::of(cert);
        if self.last.as_ref().is_none_or(|(k, _)| *k != key) {
            let replay = verify_inequality(
                &cert.z_prime_indices,
                cert.modulus,
                cert.residue,
                self.table,
                &VerifyOptions {
                    coprime_depth: cert.coprime_depth,
                    block: DEFAULT_BLOCK,
                    sizing: cert.cofactor_sizing,
                },
            )
            .map(|v| v.certificate)
            .map_err(|e| e.to_string());
            self.last = Some((key, replay));
        }
        &self.last.as_ref().expect("just filled").1
    }
}

fn first_difference(a: &Certificate, b: &Certificate) -> Option<&'static str> {
    let checks: [(&'static str, bool); 16] = [
        ("format", a.format == b.format),
        ("modulus", a.modulus == b.modulus),
        ("residue", a.residue == b.residue),
        ("z_prime_indices", a.z_prime_indices == b.z_prime_indices),
        ("n", a.n == b.n),
        (
            "small_part_factors",
            a.small_part_factors == b.small_part_factors,
        ),
        (
            "cofactor_digit_count",
            a.cofactor_digit_count == b.cofactor_digit_count,
        ),
        ("coprime_depth", a.coprime_depth == b.coprime_depth),
        ("cofactor_sizing", a.cofactor_sizing == b.cofactor_sizing),
        ("s2", a.s2 == b.s2),
        ("lhs_ratio", a.lhs_ratio == b.lhs_ratio),
        ("rhs_bound_ratio", a.rhs_bound_ratio == b.rhs_bound_ratio),
        ("lhs_decimal", a.lhs_decimal == b.lhs_decimal),
        ("rhs_decimal", a.rhs_decimal == b.rhs_decimal),
        ("final_inequality", a.final_inequality == b.final_inequality),
        ("outcome", a.outcome == b.outcome),
    ];
    checks.iter().find(|(_, same)| !same).map(|(name, _)| *name)
}
