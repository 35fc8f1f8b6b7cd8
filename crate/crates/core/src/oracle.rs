//! Brute-force ground truth for machine-word inputs.
//!
//! Everything here is independent of the big-integer pipeline: trial
//! division, and a totient sieve along arithmetic progressions for the
//! long scans.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::ratio::ExactRatio;

pub const ORACLE_MAX: u64 = i64::MAX as u64;

const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallFactorization {
    pub value: u64,
    /// Strictly increasing primes with their exponents.
    pub factors: Vec<(u64, u32)>,
}

impl SmallFactorization {
    pub fn of(value: u64) -> Result<Self> {
        if value == 0 || value > ORACLE_MAX {
            return Err(Error::invalid(format!(
                "{value} is outside the oracle range"
            )));
        }
        let mut factors = Vec::new();
        let mut n = value;
        let mut d = 2u64;
        while d <= n / d {
            if n.is_multiple_of(d) {
                let mut e = 0;
                while n.is_multiple_of(d) {
                    n /= d;
                    e += 1;
                }
                factors.push((d, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if n > 1 {
            factors.push((n, 1));
        }
        Ok(SmallFactorization { value, factors })
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn reconstruct(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

/// Euler's totient by trial division; `φ(1) = 1`.
pub fn phi_naive(m: u64) -> Result<u64> {
    Ok(SmallFactorization::of(m)?.phi())
}

/// Number of distinct prime factors.
pub fn omega_naive(m: u64) -> Result<usize> {
    Ok(SmallFactorization::of(m)?.omega())
}

fn sieve_primes_upto(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(p as i128) as u64
}

/// `φ(a·k + b)` for `k` in `lo..hi`, by sieving the progression with every
/// prime up to the square root of its largest term.
pub fn totients_on_progression(a: u64, b: u64, lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo >= hi {
        return Ok(Vec::new());
    }
    let top = (a as u128) * (hi as u128 - 1) + b as u128;
    if top > ORACLE_MAX as u128 {
        return Err(Error::invalid("progression leaves the oracle range"));
    }
    if a == 0 {
        return Ok(vec![phi_naive(b)?; (hi - lo) as usize]);
    }
    if (a as u128) * (lo as u128) + (b as u128) == 0 {
        return Err(Error::invalid("progression contains zero"));
    }
    let len = (hi - lo) as usize;
    let mut rest: Vec<u64> = (lo..hi).map(|k| a * k + b).collect();
    let mut phi = rest.clone();
    for p in sieve_primes_upto(isqrt(top as u64)) {
        let (first, step) = if a.is_multiple_of(p) {
            if !b.is_multiple_of(p) {
                continue;
            }
            // Every term is a multiple of p.
            (0, 1)
        } else {
            // a·k + b ≡ 0 (mod p)  ⇔  k ≡ −b·a⁻¹ (mod p)
            let k0 = ((p - b % p) % p) as u128 * inverse_mod(a % p, p) as u128 % p as u128;
            let offset = (k0 as u64 + p - lo % p) % p;
            (offset as usize, p as usize)
        };
        let mut idx = first;
        while idx < len {
            phi[idx] -= phi[idx] / p;
            while rest[idx].is_multiple_of(p) {
                rest[idx] /= p;
            }
            idx += step;
        }
    }
    for (f, &r) in phi.iter_mut().zip(&rest) {
        if r > 1 {
            *f -= *f / r;
        }
    }
    Ok(phi)
}

/// Least `z <= limit` with `z ≡ residue (mod modulus)` and
/// `φ(z)/z < threshold`.
pub fn smallest_z_scan(
    modulus: u64,
    residue: u64,
    threshold: &ExactRatio,
    limit: u64,
) -> Result<Option<u64>> {
    if modulus == 0 || residue >= modulus {
        return Err(Error::invalid("need 0 <= residue < modulus"));
    }
    let num = threshold.numer();
    let den = threshold.denom();
    // z = modulus·k + residue, skipping z = 0.
    let start = if residue == 0 { 1 } else { 0 };
    if limit < residue {
        return Ok(None);
    }
    let last = (limit - residue) / modulus;
    let mut lo = start;
    while lo <= last {
        let hi = (lo + CHUNK).min(last + 1);
        let phis = totients_on_progression(modulus, residue, lo, hi)?;
        for (k, phi) in (lo..hi).zip(phis) {
            let z = modulus * k + residue;
            if BigUint::from(phi) * den < num * BigUint::from(z) {
                return Ok(Some(z));
            }
        }
        lo = hi;
    }
    Ok(None)
}

/// Least `n` in `1..=limit` with `φ(a·n + b) < φ(c·n + d)`.
pub fn scan_inequality(a: u64, b: u64, c: u64, d: u64, limit: u64) -> Result<Option<u64>> {
    if (a == 0 && b == 0) || (c == 0 && d == 0) {
        return Err(Error::invalid("both sides must be positive for n >= 1"));
    }
    let mut lo = 1u64;
    while lo <= limit {
        let hi = (lo + CHUNK).min(limit + 1);
        let left = totients_on_progression(a, b, lo, hi)?;
        let right = totients_on_progression(c, d, lo, hi)?;
        if let Some(pos) = left.iter().zip(&right).position(|(l, r)| l < r) {
            return Ok(Some(lo + pos as u64));
        }
        lo = hi;
    }
    Ok(None)
}
