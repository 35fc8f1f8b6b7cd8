//! Smallest `z ≡ residue (mod M)` with `φ(z)/z < threshold`, together with a
//! ledger of every smaller integer that could have qualified.
//!
//! A qualifying `z` is coprime to `M` (the residue is), so when the primes of
//! `M` are exactly `p_1 .. p_r` the factor-count bound forces `z` to have at
//! least `t` distinct prime factors above `p_r`. The search walks integers of
//! that shape best-first to find a qualifying `z0`, then independently
//! enumerates every integer below `z0` with that shape; the enumeration is
//! exhaustive, so the smallest qualifying value in it is the answer and the
//! rest form the ledger.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::bounds::CoprimalityContext;
use crate::error::{Error, Result};
use crate::prime_table::PrimeTable;
use crate::product::product_u64;
use crate::ratio::ExactRatio;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchProblem {
    modulus: u64,
    residue: u64,
    threshold: ExactRatio,
    r: usize,
}

impl SearchProblem {
    /// Validates the problem: `gcd(residue, modulus) = 1` and the primes
    /// dividing `modulus` are exactly the first `r` primes.
    pub fn new(modulus: u64, residue: u64, threshold: ExactRatio) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        if residue >= modulus {
            return Err(Error::invalid(format!(
                "residue {residue} must lie in [0, {modulus})"
            )));
        }
        if residue.gcd(&modulus) != 1 {
            return Err(Error::invalid(format!(
                "residue {residue} shares a factor with modulus {modulus}"
            )));
        }
        if threshold.is_zero() || threshold >= ExactRatio::one() {
            return Err(Error::invalid(format!(
                "threshold {threshold} must lie strictly between 0 and 1"
            )));
        }
        let r = initial_prime_count(modulus)?;
        Ok(SearchProblem {
            modulus,
            residue,
            threshold,
            r,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn threshold(&self) -> &ExactRatio {
        &self.threshold
    }

    /// Number of leading primes dividing the modulus.
    pub fn r(&self) -> usize {
        self.r
    }
}

/// Counts the distinct primes of `modulus`, failing unless they are
/// `2, 3, 5, ...` without gaps.
pub fn initial_prime_count(modulus: u64) -> Result<usize> {
    let mut rest = modulus;
    let mut r = 0;
    let mut p = 2u64;
    while rest > 1 {
        if !rest.is_multiple_of(p) {
            return Err(gap_error(modulus));
        }
        while rest.is_multiple_of(p) {
            rest /= p;
        }
        r += 1;
        p = (p + 1..)
            .find(|&q| crate::ratio::is_prime_u64(q))
            .expect("primes are unbounded");
    }
    Ok(r)
}

fn gap_error(modulus: u64) -> Error {
    Error::invalid(format!(
        "primes dividing modulus {modulus} must be exactly the first r primes"
    ))
}

/// An integer `kernel * multiplier` where the kernel is the squarefree
/// product of `p_i` over `kernel_indices` and every prime of the multiplier
/// divides the kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub kernel_indices: Vec<usize>,
    /// Exponent of each kernel prime, parallel to `kernel_indices`.
    pub exponents: Vec<u32>,
    pub value: BigUint,
}

impl Candidate {
    pub fn is_squarefree(&self) -> bool {
        self.exponents.iter().all(|&e| e == 1)
    }

    /// Index list with each index repeated by its exponent.
    pub fn index_multiset(&self) -> Vec<usize> {
        self.kernel_indices
            .iter()
            .zip(&self.exponents)
            .flat_map(|(&i, &e)| std::iter::repeat_n(i, e as usize))
            .collect()
    }

    pub fn multiplier(&self, table: &PrimeTable) -> Result<BigUint> {
        let mut k = BigUint::one();
        for (&i, &e) in self.kernel_indices.iter().zip(&self.exponents) {
            k *= BigUint::from(table.nth_prime(i)?).pow(e - 1);
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    WrongResidue,
    RatioNotBelowThreshold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub candidate: Candidate,
    pub value_mod_m: u64,
    pub reason: Rejection,
}

/// JSON form of a ledger entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub indices: Vec<usize>,
    pub value_digits: String,
    #[serde(rename = "value_mod_M")]
    pub value_mod_m: u64,
    pub reason: Rejection,
}

impl From<&LedgerEntry> for LedgerRecord {
    fn from(entry: &LedgerEntry) -> Self {
        LedgerRecord {
            indices: entry.candidate.index_multiset(),
            value_digits: entry.candidate.value.to_str_radix(10),
            value_mod_m: entry.value_mod_m,
            reason: entry.reason,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub z: BigUint,
    /// Indices of the primes of `z`, non-decreasing, repeated by multiplicity.
    /// For a squarefree `z` they are strictly increasing.
    pub prime_indices: Vec<usize>,
    /// Minimum number of distinct prime factors any solution needs.
    pub t: usize,
    /// Every candidate below `z`, ascending, each with why it fails.
    pub ledger: Vec<LedgerEntry>,
    /// States popped by the best-first phase, including the feasible one.
    pub expansions: usize,
}

impl SearchResult {
    pub fn ledger_records(&self) -> Vec<LedgerRecord> {
        self.ledger.iter().map(LedgerRecord::from).collect()
    }

    pub fn ledger_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.ledger_records())?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    /// Upper limit on tuples popped in the best-first phase.
    pub max_expansions: usize,
    /// Upper limit on candidates enumerated below the feasible value.
    pub max_candidates: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_expansions: 1_000_000,
            max_candidates: 10_000_000,
        }
    }
}

pub fn find_smallest_z(problem: &SearchProblem, table: &PrimeTable) -> Result<SearchResult> {
    find_smallest_z_with_limits(problem, table, SearchLimits::default())
}

pub fn find_smallest_z_with_limits(
    problem: &SearchProblem,
    table: &PrimeTable,
    limits: SearchLimits,
) -> Result<SearchResult> {
    let ctx = CoprimalityContext::new(problem.r, table)?;
    let t = ctx.min_distinct_factors_for_ratio(&problem.threshold)?;
    let (z0, expansions) = best_first_feasible(problem, table, t, limits.max_expansions)?;

    let below = enumerate_with_limit(problem.r, t, &z0.value, table, Some(limits.max_candidates))?;
    let mut ledger = Vec::with_capacity(below.len());
    let mut winner = z0;
    for candidate in below {
        let value_mod_m = mod_u64(&candidate.value, problem.modulus);
        match classify(problem, table, &candidate, value_mod_m)? {
            None => {
                winner = candidate;
                break;
            }
            Some(reason) => ledger.push(LedgerEntry {
                candidate,
                value_mod_m,
                reason,
            }),
        }
    }
    Ok(SearchResult {
        z: winner.value.clone(),
        prime_indices: winner.index_multiset(),
        t,
        ledger,
        expansions,
    })
}

fn mod_u64(value: &BigUint, modulus: u64) -> u64 {
    (value % modulus).to_u64().expect("remainder fits in u64")
}

fn classify(
    problem: &SearchProblem,
    table: &PrimeTable,
    candidate: &Candidate,
    value_mod_m: u64,
) -> Result<Option<Rejection>> {
    if value_mod_m != problem.residue {
        return Ok(Some(Rejection::WrongResidue));
    }
    if !ratio_below(table, &candidate.kernel_indices, &problem.threshold)? {
        return Ok(Some(Rejection::RatioNotBelowThreshold));
    }
    Ok(None)
}

/// `∏ (1 − 1/p_i) < threshold`, compared without reducing the product.
fn ratio_below(table: &PrimeTable, indices: &[usize], threshold: &ExactRatio) -> Result<bool> {
    let primes = indices
        .iter()
        .map(|&i| table.nth_prime(i))
        .collect::<Result<Vec<_>>>()?;
    let less: Vec<u64> = primes.iter().map(|p| p - 1).collect();
    Ok(product_u64(&less) * threshold.denom() < threshold.numer() * product_u64(&primes))
}

/// Pops integers with at least `t` distinct primes above `p_r` in increasing
/// order until one meets both the residue and ratio conditions.
fn best_first_feasible(
    problem: &SearchProblem,
    table: &PrimeTable,
    t: usize,
    max_expansions: usize,
) -> Result<(Candidate, usize)> {
    let r = problem.r;
    if r + t > table.count() {
        return Err(Error::TableExhausted {
            count: table.count(),
            context: "base kernel needs primes past the table",
        });
    }
    let base = Candidate {
        kernel_indices: (r + 1..=r + t).collect(),
        exponents: vec![1; t],
        value: table.primorial_range(r + 1, r + t)?,
    };

    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<(Vec<usize>, Vec<u32>)> = HashSet::new();
    let push = |heap: &mut BinaryHeap<Reverse<HeapItem>>,
                seen: &mut HashSet<(Vec<usize>, Vec<u32>)>,
                cand: Candidate| {
        if seen.insert((cand.kernel_indices.clone(), cand.exponents.clone())) {
            heap.push(Reverse(HeapItem(cand)));
        }
    };
    push(&mut heap, &mut seen, base);

    let mut expansions = 0;
    while let Some(Reverse(HeapItem(cand))) = heap.pop() {
        expansions += 1;
        if mod_u64(&cand.value, problem.modulus) == problem.residue
            && ratio_below(table, &cand.kernel_indices, &problem.threshold)?
        {
            return Ok((cand, expansions));
        }
        if expansions >= max_expansions {
            break;
        }
        // Every state other than the base has a strictly smaller predecessor:
        // lower an exponent, or (when squarefree) lower one index or drop the
        // last one. The moves below invert those, so states pop in value order.
        let len = cand.kernel_indices.len();
        for j in 0..len {
            let p = table.nth_prime(cand.kernel_indices[j])?;
            let mut next = cand.clone();
            next.exponents[j] += 1;
            next.value *= p;
            push(&mut heap, &mut seen, next);
        }
        if !cand.is_squarefree() {
            continue;
        }
        for j in 0..len {
            let bumped = cand.kernel_indices[j] + 1;
            let room = if j + 1 < len {
                bumped < cand.kernel_indices[j + 1]
            } else {
                bumped <= table.count()
            };
            if !room {
                continue;
            }
            let mut next = cand.clone();
            next.kernel_indices[j] = bumped;
            next.value =
                &cand.value / table.nth_prime(cand.kernel_indices[j])? * table.nth_prime(bumped)?;
            push(&mut heap, &mut seen, next);
        }
        let appended = cand.kernel_indices[len - 1] + 1;
        if appended <= table.count() {
            let mut next = cand.clone();
            next.kernel_indices.push(appended);
            next.exponents.push(1);
            next.value *= table.nth_prime(appended)?;
            push(&mut heap, &mut seen, next);
        }
    }
    Err(Error::BudgetExhausted(max_expansions))
}

/// Heap entry ordered by value alone; values of distinct states differ.
struct HeapItem(Candidate);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.0.value == other.0.value
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.value.cmp(&other.0.value)
    }
}

/// Every integer `v < bound` coprime to `p_1 .. p_r` with at least `t`
/// distinct prime factors, ascending.
pub fn enumerate_candidates(
    r: usize,
    t: usize,
    bound: &BigUint,
    table: &PrimeTable,
) -> Result<Vec<Candidate>> {
    enumerate_with_limit(r, t, bound, table, None)
}

fn enumerate_with_limit(
    r: usize,
    t: usize,
    bound: &BigUint,
    table: &PrimeTable,
    limit: Option<usize>,
) -> Result<Vec<Candidate>> {
    if t == 0 {
        return Err(Error::invalid("candidate enumeration needs t >= 1"));
    }
    let mut walker = Walker {
        table,
        bound,
        t,
        prefix: vec![BigUint::one()],
        out: Vec::new(),
        limit,
    };
    let mut indices = Vec::new();
    walker.descend(&mut indices, &BigUint::one(), r + 1)?;
    let mut out = walker.out;
    out.sort_by(|a, b| a.value.cmp(&b.value));
    Ok(out)
}

struct Walker<'a> {
    table: &'a PrimeTable,
    bound: &'a BigUint,
    t: usize,
    /// prefix[k] = p_1 * ... * p_k
    prefix: Vec<BigUint>,
    out: Vec<Candidate>,
    limit: Option<usize>,
}

impl Walker<'_> {
    fn prefix(&mut self, k: usize) -> Result<&BigUint> {
        if k > self.table.count() {
            return Err(self.exhausted());
        }
        while self.prefix.len() <= k {
            let next = self.prefix.len();
            let p = self.table.nth_prime(next)?;
            let v = &self.prefix[next - 1] * p;
            self.prefix.push(v);
        }
        Ok(&self.prefix[k])
    }

    fn exhausted(&self) -> Error {
        Error::TableExhausted {
            count: self.table.count(),
            context: "candidate enumeration ran past the table",
        }
    }

    /// Extends the strictly increasing tuple `indices` (product `partial`)
    /// with indices `>= next`, pruning as soon as even the cheapest
    /// completion reaches the bound.
    fn descend(&mut self, indices: &mut Vec<usize>, partial: &BigUint, next: usize) -> Result<()> {
        if indices.len() >= self.t {
            self.emit(indices, partial)?;
        }
        let need = self.t.saturating_sub(indices.len());
        let mut i = next;
        loop {
            if i > self.table.count() {
                return Err(self.exhausted());
            }
            let p = self.table.nth_prime(i)?;
            let fits = if need <= 1 {
                partial * p < *self.bound
            } else {
                // partial * p_i * ... * p_{i+need-1} < bound
                let hi = self.prefix(i + need - 1)?.clone();
                let bound = self.bound;
                let lo = self.prefix(i - 1)?;
                partial * hi < bound * lo
            };
            if !fits {
                return Ok(());
            }
            indices.push(i);
            self.descend(indices, &(partial * p), i + 1)?;
            indices.pop();
            i += 1;
        }
    }

    fn emit(&mut self, indices: &[usize], kernel: &BigUint) -> Result<()> {
        let primes = indices
            .iter()
            .map(|&i| self.table.nth_prime(i))
            .collect::<Result<Vec<_>>>()?;
        let mut exponents = vec![1u32; indices.len()];
        self.emit_powers(indices, &primes, &mut exponents, kernel.clone(), 0)
    }

    /// Emits `value` and every multiple of it by kernel primes at positions
    /// `>= start` that stays below the bound; each exponent vector once.
    fn emit_powers(
        &mut self,
        indices: &[usize],
        primes: &[u64],
        exponents: &mut Vec<u32>,
        value: BigUint,
        start: usize,
    ) -> Result<()> {
        if let Some(limit) = self.limit {
            if self.out.len() >= limit {
                return Err(Error::BudgetExhausted(limit));
            }
        }
        for j in start..primes.len() {
            let bigger = &value * primes[j];
            if bigger >= *self.bound {
                // Primes are ascending, so later positions overshoot too.
                break;
            }
            exponents[j] += 1;
            self.emit_powers(indices, primes, exponents, bigger, j)?;
            exponents[j] -= 1;
        }
        self.out.push(Candidate {
            kernel_indices: indices.to_vec(),
            exponents: exponents.clone(),
            value,
        });
        Ok(())
    }
}
