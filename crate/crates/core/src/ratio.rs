//! Exact non-negative rationals for φ(m)/m values and their bounds.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::product_u64;

/// A non-negative rational kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactRatio {
    numer: BigUint,
    denom: BigUint,
}

impl ExactRatio {
    pub fn new(numer: BigUint, denom: BigUint) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        Ok(Self::reduced(numer, denom))
    }

    pub fn from_u64(numer: u64, denom: u64) -> Result<Self> {
        Self::new(numer.into(), denom.into())
    }

    pub fn one() -> Self {
        ExactRatio {
            numer: BigUint::one(),
            denom: BigUint::one(),
        }
    }

    fn reduced(numer: BigUint, denom: BigUint) -> Self {
        let g = numer.gcd(&denom);
        if g.is_one() {
            ExactRatio { numer, denom }
        } else {
            ExactRatio {
                numer: numer / &g,
                denom: denom / &g,
            }
        }
    }

    /// ∏(1 − 1/p) over distinct primes, reduced once at the end.
    pub fn phi_ratio_from_primes(primes: &[u64]) -> Result<Self> {
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate prime in phi-ratio input"));
        }
        if let Some(&p) = sorted.iter().find(|&&p| !is_prime_u64(p)) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(Self::phi_ratio_unchecked(&sorted))
    }

    /// Same as [`phi_ratio_from_primes`](Self::phi_ratio_from_primes) for
    /// inputs already known to be distinct primes (e.g. table slices).
    pub(crate) fn phi_ratio_unchecked(primes: &[u64]) -> Self {
        let less: Vec<u64> = primes.iter().map(|p| p - 1).collect();
        Self::reduced(product_u64(&less), product_u64(primes))
    }

    pub fn numer(&self) -> &BigUint {
        &self.numer
    }

    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.numer == self.denom
    }

    /// Renders `floor(self * 10^digits) / 10^digits`, i.e. truncated, never rounded.
    pub fn to_decimal_truncated(&self, digits: usize) -> String {
        let scale = BigUint::from(10u32).pow(digits as u32);
        let scaled = &self.numer * &scale / &self.denom;
        let (int_part, frac) = scaled.div_rem(&scale);
        let frac = frac.to_str_radix(10);
        format!("{int_part}.{}{frac}", "0".repeat(digits - frac.len()))
    }

    pub fn to_parts(&self) -> RatioParts {
        RatioParts {
            numerator: self.numer.to_str_radix(10),
            denominator: self.denom.to_str_radix(10),
        }
    }
}

impl Ord for ExactRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.numer * &other.denom).cmp(&(&other.numer * &self.denom))
    }
}

impl PartialOrd for ExactRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Mul for &ExactRatio {
    type Output = ExactRatio;

    fn mul(self, rhs: &ExactRatio) -> ExactRatio {
        ExactRatio::reduced(&self.numer * &rhs.numer, &self.denom * &rhs.denom)
    }
}

impl std::ops::Mul for ExactRatio {
    type Output = ExactRatio;

    fn mul(self, rhs: ExactRatio) -> ExactRatio {
        &self * &rhs
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for ExactRatio {
    type Err = Error;

    /// Parses `"a/b"` or a bare integer `"a"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |part: &str| {
            BigUint::from_str(part.trim())
                .map_err(|_| Error::invalid(format!("bad ratio component {part:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Self::new(parse(n)?, parse(d)?),
            None => Self::new(parse(s)?, BigUint::one()),
        }
    }
}

/// Wire form of a ratio: numerator and denominator as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioParts {
    pub numerator: String,
    pub denominator: String,
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d <= n / d {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
