//! Bounds for integers known to avoid the first `r` primes.
//!
//! Let `q = p_{r+1} * ... * p_{r+s}` and let `m` be coprime to `p_1 .. p_r`.
//! If `m <= q` then `m` has at most `s` distinct prime factors, and any such
//! `m` satisfies `φ(m)/m >= φ(q)/q`. Read backwards: if `φ(m)/m` is below
//! `φ(q)/q` then `m` needs more than `s` distinct prime factors.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::prime_table::PrimeTable;
use crate::ratio::ExactRatio;

/// The primes `p_1 .. p_r` are excluded as divisors.
#[derive(Debug, Clone, Copy)]
pub struct CoprimalityContext<'a> {
    r: usize,
    table: &'a PrimeTable,
}

impl<'a> CoprimalityContext<'a> {
    pub fn new(r: usize, table: &'a PrimeTable) -> Result<Self> {
        if r > table.count() {
            return Err(Error::IndexOutOfRange {
                index: r,
                count: table.count(),
            });
        }
        Ok(CoprimalityContext { r, table })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn table(&self) -> &'a PrimeTable {
        self.table
    }

    /// Least `s` with `m <= p_{r+1} * ... * p_{r+s}`; `m` then has at most
    /// `s` distinct prime factors.
    pub fn max_distinct_factors(&self, m: &BigUint) -> Result<usize> {
        if m.is_zero() {
            return Err(Error::invalid("m must be positive"));
        }
        let mut product = BigUint::one();
        let mut s = 0;
        while &product < m {
            let index = self.r + s + 1;
            if index > self.table.count() {
                return Err(Error::TableExhausted {
                    count: self.table.count(),
                    context: "primorial never reached m",
                });
            }
            product *= self.table.nth_prime(index)?;
            s += 1;
        }
        Ok(s)
    }

    /// `∏_{i=r+1}^{r+s} (1 − 1/p_i)`, the smallest φ-ratio any integer coprime
    /// to `p_1 .. p_r` with at most `s` distinct prime factors can have.
    pub fn phi_ratio_lower_bound(&self, s: usize) -> Result<ExactRatio> {
        if self.r + s > self.table.count() {
            return Err(Error::TableExhausted {
                count: self.table.count(),
                context: "lower bound needs primes past the table",
            });
        }
        let primes = self.table.range(self.r + 1, self.r + s)?;
        Ok(ExactRatio::phi_ratio_unchecked(primes))
    }

    /// Least `t` with `phi_ratio_lower_bound(t) < threshold`. Every `m`
    /// coprime to `p_1 .. p_r` with `φ(m)/m < threshold` has at least `t`
    /// distinct prime factors.
    pub fn min_distinct_factors_for_ratio(&self, threshold: &ExactRatio) -> Result<usize> {
        if threshold.is_zero() || threshold >= &ExactRatio::one() {
            return Err(Error::invalid(format!(
                "threshold {threshold} must lie strictly between 0 and 1"
            )));
        }
        // Running product kept unreduced: numer/denom = ∏ (p-1)/p.
        let mut numer = BigUint::one();
        let mut denom = BigUint::one();
        let mut t = 0;
        loop {
            let below = (&numer * threshold.denom()).cmp(&(threshold.numer() * &denom));
            if below == Ordering::Less {
                return Ok(t);
            }
            let index = self.r + t + 1;
            if index > self.table.count() {
                return Err(Error::TableExhausted {
                    count: self.table.count(),
                    context: "threshold never crossed",
                });
            }
            let p = self.table.nth_prime(index)?;
            numer *= p - 1;
            denom *= p;
            t += 1;
        }
    }
}
