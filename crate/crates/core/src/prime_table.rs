//! 1-indexed table of the first primes, built with a segmented sieve.
//!
//! Index `i` always refers to the `i`-th prime, so `nth_prime(1) == 2`.
//! The table can be persisted to a small checksummed binary cache:
//!
//! ```text
//! "PTBL1" | count: u64 LE | count x prime: u64 LE | checksum: u64 LE
//! ```
//!
//! where the checksum is the wrapping sum of all primes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::product::product_u64;

/// Default sieve segment, counted in odd residues.
pub const DEFAULT_SEGMENT_ODDS: usize = 1 << 20;

const MAX_COUNT: usize = 1_000_000_000;
const CACHE_MAGIC: &[u8; 5] = b"PTBL1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Builds a table holding exactly `count` primes.
    pub fn build(count: usize) -> Result<Self> {
        Self::build_with_segment(count, DEFAULT_SEGMENT_ODDS)
    }

    pub fn build_with_segment(count: usize, segment_odds: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("prime table needs at least one prime"));
        }
        if count > MAX_COUNT {
            return Err(Error::TableTooLarge(count));
        }
        if segment_odds == 0 {
            return Err(Error::invalid("segment size must be positive"));
        }
        Ok(PrimeTable {
            primes: segmented_sieve(count, segment_odds),
        })
    }

    /// Loads the table from `path` when it holds at least `count` primes,
    /// otherwise sieves and rewrites the cache.
    pub fn load_or_build(path: &Path, count: usize) -> Result<Self> {
        match Self::read_cache(path) {
            Ok(table) if table.count() >= count => return Ok(table.truncated(count)),
            Ok(_) => {}
            Err(Error::Io(e)) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        let table = Self::build(count)?;
        table.write_cache(path)?;
        Ok(table)
    }

    pub fn count(&self) -> usize {
        self.primes.len()
    }

    /// The `i`-th prime, 1-indexed.
    pub fn nth_prime(&self, i: usize) -> Result<u64> {
        self.check_index(i)?;
        Ok(self.primes[i - 1])
    }

    /// Primes `p_lo ..= p_hi` as a slice.
    pub fn range(&self, lo: usize, hi: usize) -> Result<&[u64]> {
        if lo == 0 || lo > hi + 1 {
            return Err(Error::IndexOutOfRange {
                index: lo,
                count: self.count(),
            });
        }
        if hi > 0 {
            self.check_index(hi)?;
        }
        Ok(&self.primes[lo - 1..hi])
    }

    /// Exact product `p_lo * ... * p_hi`.
    pub fn primorial_range(&self, lo: usize, hi: usize) -> Result<BigUint> {
        if lo > hi {
            return Err(Error::invalid(format!("empty primorial range {lo}..={hi}")));
        }
        Ok(product_u64(self.range(lo, hi)?))
    }

    /// 1-based index of `p`, if it is one of the tabulated primes.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok().map(|i| i + 1)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.count() {
            Err(Error::IndexOutOfRange {
                index: i,
                count: self.count(),
            })
        } else {
            Ok(())
        }
    }

    fn truncated(mut self, count: usize) -> Self {
        self.primes.truncate(count);
        self
    }

    pub fn to_cache_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CACHE_MAGIC.len() + 16 + 8 * self.count());
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&(self.count() as u64).to_le_bytes());
        let mut sum = 0u64;
        for &p in &self.primes {
            out.extend_from_slice(&p.to_le_bytes());
            sum = sum.wrapping_add(p);
        }
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::BadCache(msg.to_string());
        let body = bytes
            .strip_prefix(CACHE_MAGIC.as_slice())
            .ok_or_else(|| bad("missing PTBL1 magic"))?;
        if body.len() < 16 {
            return Err(bad("truncated header"));
        }
        let word = |chunk: &[u8]| u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        let count = word(&body[..8]) as usize;
        if count == 0 || body.len() != 16 + 8 * count {
            return Err(bad("length does not match prime count"));
        }
        let primes: Vec<u64> = body[8..8 + 8 * count].chunks_exact(8).map(word).collect();
        let expected = primes.iter().fold(0u64, |acc, &p| acc.wrapping_add(p));
        if word(&body[8 + 8 * count..]) != expected {
            return Err(bad("checksum mismatch"));
        }
        if primes[0] != 2 || primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("primes are not strictly increasing from 2"));
        }
        Ok(PrimeTable { primes })
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        Self::from_cache_bytes(&fs::read(path)?)
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(&self.to_cache_bytes())?;
        Ok(())
    }
}

/// Odd primes up to `limit` by a plain sieve; used as sieving primes.
fn small_odd_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn segmented_sieve(count: usize, segment_odds: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    primes.push(2u64);
    let mut base: Vec<u64> = Vec::new();
    let mut base_limit = 0u64;
    let mut composite = vec![false; segment_odds];
    // Segment k covers the odd numbers lo, lo+2, ..., lo + 2*(segment_odds-1).
    let mut lo = 3u64;
    while primes.len() < count {
        let hi = lo + 2 * segment_odds as u64; // exclusive
        let root = isqrt(hi) + 1;
        if root > base_limit {
            base_limit = root.max(2 * base_limit);
            base = small_odd_primes(base_limit);
        }
        composite.iter_mut().for_each(|c| *c = false);
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut idx = ((start - lo) / 2) as usize;
            while idx < segment_odds {
                composite[idx] = true;
                idx += p as usize;
            }
        }
        for (idx, &c) in composite.iter().enumerate() {
            if !c {
                primes.push(lo + 2 * idx as u64);
                if primes.len() == count {
                    break;
                }
            }
        }
        lo = hi;
    }
    primes
}
