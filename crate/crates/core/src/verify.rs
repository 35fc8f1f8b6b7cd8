//! Proves `φ(Mn + b) < φ(Mn)` without factoring `n`.
//!
//! `z = Mn + b` is fully factored by construction. For `Mn` we only peel off
//! the primes among `p_1 .. p_K` (by gcd against block products) and bound
//! the unfactored cofactor's φ-ratio from below using its size alone. The
//! last step is one exact integer comparison `φ(z)·D < N·Mn` for the bound
//! `N/D`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{CheckedSub, One, Zero};

use serde::{Deserialize, Serialize};

use crate::bounds::CoprimalityContext;
use crate::certificate::{Certificate, FinalInequality, Outcome, CERT_FORMAT};
use crate::error::{Error, Result};
use crate::prime_table::PrimeTable;
use crate::product::{digit_count, product_u64};
use crate::ratio::ExactRatio;

/// Full-scale defaults: coprimality depth and gcd block size.
pub const DEFAULT_COPRIME_DEPTH: usize = 80_000;
pub const DEFAULT_BLOCK: usize = 1_000;

/// Digits shown when rendering ratios for humans.
pub const DISPLAY_DIGITS: usize = 7;

/// `value = cofactor * ∏ prime^exponent`, with the cofactor coprime to
/// `p_1 .. p_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationSketch {
    pub value: BigUint,
    /// Ascending by prime.
    pub known_factors: Vec<(u64, u32)>,
    pub cofactor: BigUint,
    pub coprime_depth: usize,
}

impl FactorizationSketch {
    pub fn known_part(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &(p, e) in &self.known_factors {
            acc *= BigUint::from(p).pow(e);
        }
        acc
    }

    /// Checks `value = cofactor · known part` by exact multiplication.
    pub fn is_consistent(&self) -> bool {
        self.known_part() * &self.cofactor == self.value
    }

    /// `gcd(cofactor, block product) = 1` for every block of the first `K` primes.
    pub fn cofactor_is_coprime(&self, table: &PrimeTable, block: usize) -> Result<bool> {
        let products = block_products(table, self.coprime_depth, block)?;
        Ok(products
            .iter()
            .all(|(_, prod)| gcd_reduced(&self.cofactor, prod).is_one()))
    }

    /// Sketch of `factor · value` for a fully factored `factor` whose primes
    /// all lie among `p_1 .. p_K`.
    pub fn scaled_by(&self, factors: &[(u64, u32)], table: &PrimeTable) -> Result<Self> {
        let mut merged = self.known_factors.clone();
        let mut value = self.value.clone();
        for &(p, e) in factors {
            match table.index_of(p) {
                Some(i) if i <= self.coprime_depth => {}
                _ => {
                    return Err(Error::invalid(format!(
                        "prime {p} is not among the first {} primes",
                        self.coprime_depth
                    )))
                }
            }
            value *= BigUint::from(p).pow(e);
            match merged.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(pos) => merged[pos].1 += e,
                Err(pos) => merged.insert(pos, (p, e)),
            }
        }
        Ok(FactorizationSketch {
            value,
            known_factors: merged,
            cofactor: self.cofactor.clone(),
            coprime_depth: self.coprime_depth,
        })
    }
}

fn block_products(
    table: &PrimeTable,
    depth: usize,
    block: usize,
) -> Result<Vec<(&[u64], BigUint)>> {
    if block == 0 {
        return Err(Error::invalid("block size must be positive"));
    }
    if depth > table.count() {
        return Err(Error::TableExhausted {
            count: table.count(),
            context: "coprimality depth exceeds the table",
        });
    }
    Ok(table.as_slice()[..depth]
        .chunks(block)
        .map(|chunk| (chunk, product_u64(chunk)))
        .collect())
}

/// `gcd(a, b)`, reducing the wider operand first: binary gcd is slow on
/// unbalanced inputs.
fn gcd_reduced(a: &BigUint, b: &BigUint) -> BigUint {
    if a.is_zero() || b.is_zero() {
        return a.gcd(b);
    }
    if a.bits() > b.bits() {
        b.gcd(&(a % b))
    } else {
        a.gcd(&(b % a))
    }
}

/// Divides out every prime among `p_1 .. p_K` from `n` to full multiplicity,
/// finding them by gcd of the running cofactor with products of `block`
/// consecutive primes.
pub fn extract_known_factors(
    n: &BigUint,
    table: &PrimeTable,
    coprime_depth: usize,
    block: usize,
) -> Result<FactorizationSketch> {
    if n.is_zero() {
        return Err(Error::invalid("cannot sketch zero"));
    }
    let blocks = block_products(table, coprime_depth, block)?;
    let mut cofactor = n.clone();
    let mut known_factors = Vec::new();
    for (chunk, prod) in &blocks {
        let g = gcd_reduced(&cofactor, prod);
        if g.is_one() {
            continue;
        }
        for &p in chunk.iter() {
            if !(&g % p).is_zero() {
                continue;
            }
            let mut e = 0u32;
            loop {
                let (q, rem) = cofactor.div_rem(&BigUint::from(p));
                if !rem.is_zero() {
                    break;
                }
                cofactor = q;
                e += 1;
            }
            known_factors.push((p, e));
        }
    }
    if !blocks
        .iter()
        .all(|(_, prod)| gcd_reduced(&cofactor, prod).is_one())
    {
        return Err(Error::invalid(
            "cofactor still shares a prime with a block product",
        ));
    }
    Ok(FactorizationSketch {
        value: n.clone(),
        known_factors,
        cofactor,
        coprime_depth,
    })
}

/// `(∏ p_i, ∏ (p_i − 1))` over distinct indices.
pub fn phi_exact(prime_indices: &[usize], table: &PrimeTable) -> Result<(BigUint, BigUint)> {
    let mut sorted = prime_indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate prime index"));
    }
    phi_of_index_multiset(&sorted, table)
}

/// Like [`phi_exact`], but a repeated index stands for a higher power.
pub fn phi_of_index_multiset(
    prime_indices: &[usize],
    table: &PrimeTable,
) -> Result<(BigUint, BigUint)> {
    let mut sorted = prime_indices.to_vec();
    sorted.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for i in sorted {
        let p = table.nth_prime(i)?;
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(phi_of_factors(&factors))
}

/// `(value, φ(value))` for `value = ∏ p^e`.
pub fn phi_of_factors(factors: &[(u64, u32)]) -> (BigUint, BigUint) {
    let primes: Vec<u64> = factors.iter().map(|&(p, _)| p).collect();
    let less: Vec<u64> = primes.iter().map(|p| p - 1).collect();
    let mut value = product_u64(&primes);
    let mut phi = product_u64(&less);
    for &(p, e) in factors {
        if e > 1 {
            let extra = BigUint::from(p).pow(e - 1);
            value *= &extra;
            phi *= extra;
        }
    }
    (value, phi)
}

/// A lower bound on `φ(value)/value` derived from a sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchBound {
    /// Factor-count bound for the cofactor.
    pub s: usize,
    /// Exact φ-ratio of the known part.
    pub known_ratio: ExactRatio,
    /// `∏_{i=K+1}^{K+s} (1 − 1/p_i)`.
    pub cofactor_bound: ExactRatio,
    pub ratio: ExactRatio,
}

/// What the cofactor's size is compared against when choosing `s`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CofactorSizing {
    /// The whole sketched `n`: `s` is least with `n <= p_{K+1} ⋯ p_{K+s}`.
    /// Looser by at most a prime or so, and the default.
    /// A cofactor of 1 still gets `s = 0`.
    #[default]
    SketchedValue,
    /// The cofactor itself: the tightest `s`.
    Cofactor,
}

/// Bound for a sketch whose cofactor is at most `size`.
pub fn bound_with_size(
    sketch: &FactorizationSketch,
    size: &BigUint,
    table: &PrimeTable,
) -> Result<SketchBound> {
    if size < &sketch.cofactor {
        return Err(Error::invalid(
            "size reference is smaller than the cofactor",
        ));
    }
    let ctx = CoprimalityContext::new(sketch.coprime_depth, table)?;
    let s = ctx.max_distinct_factors(size)?;
    let cofactor_bound = ctx.phi_ratio_lower_bound(s)?;
    let primes: Vec<u64> = sketch.known_factors.iter().map(|&(p, _)| p).collect();
    let known_ratio = ExactRatio::phi_ratio_unchecked(&primes);
    let ratio = &known_ratio * &cofactor_bound;
    Ok(SketchBound {
        s,
        known_ratio,
        cofactor_bound,
        ratio,
    })
}

pub fn bound_from_sketch(sketch: &FactorizationSketch, table: &PrimeTable) -> Result<SketchBound> {
    bound_with_size(sketch, &sketch.cofactor, table)
}

/// Lower bound on `φ(value)/value` for a sketched value.
pub fn lower_bound_phi_over_m(
    sketch: &FactorizationSketch,
    table: &PrimeTable,
) -> Result<ExactRatio> {
    Ok(bound_from_sketch(sketch, table)?.ratio)
}

/// Trial-division factorization of a machine word.
pub(crate) fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= n / d {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub coprime_depth: usize,
    pub block: usize,
    pub sizing: CofactorSizing,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            coprime_depth: DEFAULT_COPRIME_DEPTH,
            block: DEFAULT_BLOCK,
            sizing: CofactorSizing::default(),
        }
    }
}

impl VerifyOptions {
    pub fn with_depth(coprime_depth: usize, block: usize) -> Self {
        VerifyOptions {
            coprime_depth,
            block,
            ..Self::default()
        }
    }
}

/// Everything computed while proving one instance.
#[derive(Debug, Clone)]
pub struct Verification {
    pub certificate: Certificate,
    pub z: BigUint,
    pub n: BigUint,
    pub lhs_ratio: ExactRatio,
    /// Sketch of `n` itself.
    pub n_sketch: FactorizationSketch,
    /// Sketch of `M·n`, with the modulus merged into the known part.
    pub mn_sketch: FactorizationSketch,
    pub bound: SketchBound,
    /// Digits of `p_{K+1} ⋯ p_{K+s}`.
    pub q2_digits: usize,
}

impl Verification {
    pub fn outcome(&self) -> Outcome {
        self.certificate.outcome
    }
}

/// Builds the certificate for `z = ∏ p_i` (indices as a multiset) and
/// `n = (z − residue)/M`.
pub fn verify_inequality(
    z_prime_indices: &[usize],
    modulus: u64,
    residue: u64,
    table: &PrimeTable,
    options: &VerifyOptions,
) -> Result<Verification> {
    let coprime_depth = options.coprime_depth;
    if modulus == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if z_prime_indices.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("z prime indices must be non-decreasing"));
    }
    let (z, phi_z) = phi_of_index_multiset(z_prime_indices, table)?;
    let (diff_n, rem) = match z.checked_sub(&BigUint::from(residue)) {
        Some(d) => d.div_rem(&BigUint::from(modulus)),
        None => return Err(Error::invalid("z is smaller than the residue")),
    };
    if !rem.is_zero() {
        return Err(Error::invalid(format!(
            "z is not congruent to {residue} mod {modulus}"
        )));
    }
    let n = diff_n;
    if n.is_zero() {
        return Err(Error::invalid("z equals the residue, so n = 0"));
    }
    let lhs_ratio = ExactRatio::new(phi_z.clone(), z.clone())?;

    let n_sketch = extract_known_factors(&n, table, coprime_depth, options.block)?;
    let mn_sketch = n_sketch.scaled_by(&factor_u64(modulus), table)?;
    // A trivial cofactor is always sized as itself, keeping the bound exact.
    let size = match options.sizing {
        CofactorSizing::SketchedValue if !n_sketch.cofactor.is_one() => &n,
        _ => &n_sketch.cofactor,
    };
    let bound = bound_with_size(&mn_sketch, size, table)?;
    let q2_digits = if bound.s == 0 {
        1
    } else {
        digit_count(&table.primorial_range(coprime_depth + 1, coprime_depth + bound.s)?)
    };

    let mn = &mn_sketch.value;
    let left = &phi_z * bound.ratio.denom();
    let right = bound.ratio.numer() * mn;
    let outcome = if left < right {
        Outcome::Proven
    } else if bound.s == 0 {
        // Fully factored: the bound is φ(Mn)/Mn exactly.
        Outcome::Disproven
    } else {
        Outcome::Inconclusive
    };

    let certificate = Certificate {
        format: CERT_FORMAT.to_string(),
        modulus,
        residue,
        z_prime_indices: z_prime_indices.to_vec(),
        n: n.to_str_radix(10),
        small_part_factors: n_sketch.known_factors.clone(),
        cofactor_digit_count: digit_count(&n_sketch.cofactor),
        coprime_depth,
        cofactor_sizing: options.sizing,
        s2: bound.s,
        lhs_ratio: lhs_ratio.to_parts(),
        rhs_bound_ratio: bound.ratio.to_parts(),
        lhs_decimal: lhs_ratio.to_decimal_truncated(DISPLAY_DIGITS),
        rhs_decimal: bound.ratio.to_decimal_truncated(DISPLAY_DIGITS),
        final_inequality: FinalInequality {
            left: left.to_str_radix(10),
            right: right.to_str_radix(10),
        },
        outcome,
    };
    Ok(Verification {
        certificate,
        z,
        n,
        lhs_ratio,
        n_sketch,
        mn_sketch,
        bound,
        q2_digits,
    })
}
