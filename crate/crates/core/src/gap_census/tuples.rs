//! Prime-tuple counts over `m <= x` and the inclusion–exclusion sandwich
//! relating them to consecutive-prime pattern counts.

use itertools::Itertools;
use serde::Serialize;

use super::{run_census, AnchorConvention, GapPattern};
use crate::error::{domain, CoreError, Result};
use crate::prime_engine::PrimeTable;

/// Work budget for [`bonferroni_check`], in (offset set × x) units.
pub const BONFERRONI_BUDGET: u128 = 4_000_000_000;

/// Number of `m` in `1..=x` with `m + d` prime for every `d` in `offsets`.
pub fn pi_tuple_empirical(x: u64, offsets: &[u64]) -> Result<u64> {
    let reach = offsets.iter().copied().max().unwrap_or(0);
    let limit = x
        .checked_add(reach)
        .ok_or_else(|| CoreError::Capacity(format!("x + {reach} overflows")))?;
    let table = PrimeTable::new(limit.max(2))?;
    pi_tuple_with(&table, x, offsets)
}

/// As [`pi_tuple_empirical`], against a precomputed table covering
/// `x + max(offsets)`.
pub fn pi_tuple_with(table: &PrimeTable, x: u64, offsets: &[u64]) -> Result<u64> {
    let mut offs = offsets.to_vec();
    offs.sort_unstable();
    offs.dedup();
    let Some(&reach) = offs.last() else {
        return Ok(x);
    };
    if x.saturating_add(reach) > table.limit() {
        return domain(format!(
            "prime table up to {} cannot cover x = {x} with offset {reach}",
            table.limit()
        ));
    }
    let all_prime = |m: u64| offs.iter().all(|&d| table.is_prime(m + d));
    let count = if offs[0] == 0 {
        // m itself must be prime
        table
            .primes()
            .take_while(|&p| p <= x)
            .filter(|&p| all_prime(p))
            .count()
    } else {
        (1..=x).filter(|&m| all_prime(m)).count()
    };
    Ok(count as u64)
}

/// Outcome of one inclusion–exclusion sandwich.
///
/// `census` is `N_k(x, D)` with runs anchored at their smallest prime, so
/// both sides count the same `m <= x` and the inequalities are exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BonferroniReport {
    pub x: u64,
    pub pattern: GapPattern,
    pub depth: usize,
    pub h: u64,
    pub census: u64,
    /// Truncation after `2I + 2` alternating terms, interior offsets below `d_k`.
    pub lower: i128,
    /// Truncation after `2I + 1` alternating terms, interior offsets below `H`.
    pub upper: i128,
    /// `lower_terms[i]` is the sum of tuple counts over `i`-subsets.
    pub lower_terms: Vec<u64>,
    pub upper_terms: Vec<u64>,
}

impl BonferroniReport {
    pub fn holds(&self) -> bool {
        self.lower <= self.census as i128 && self.census as i128 <= self.upper
    }
}

/// Check `lower <= N_k(x, D) <= upper` at truncation depth `depth` with
/// upper-bound interior window `(0, h)`.
pub fn bonferroni_check(
    x: u64,
    pattern: &GapPattern,
    depth: usize,
    h: u64,
) -> Result<BonferroniReport> {
    let dk = pattern.largest();
    if h == 0 || h > dk {
        return domain(format!("H must satisfy 1 <= H <= d_k = {dk}, got {h}"));
    }
    if x < 2 {
        return domain(format!("x must be >= 2, got {x}"));
    }
    let interior = |bound: u64| -> Vec<u64> {
        (1..bound)
            .filter(|m| !pattern.diffs().contains(m))
            .collect()
    };
    let lower_set = interior(dk);
    let upper_set = interior(h);
    let required = subset_count(lower_set.len(), 2 * depth + 1)
        .saturating_add(subset_count(upper_set.len(), 2 * depth))
        .saturating_mul(x as u128);
    if required > BONFERRONI_BUDGET {
        return Err(CoreError::Budget {
            what: format!("Bonferroni check for {pattern:?} at x = {x}, I = {depth}"),
            required,
            budget: BONFERRONI_BUDGET,
        });
    }
    let table = PrimeTable::new(x + dk)?;
    bonferroni_check_with(&table, x, pattern, depth, h)
}

/// As [`bonferroni_check`] against a precomputed prime table, without the
/// budget guard.
pub fn bonferroni_check_with(
    table: &PrimeTable,
    x: u64,
    pattern: &GapPattern,
    depth: usize,
    h: u64,
) -> Result<BonferroniReport> {
    let dk = pattern.largest();
    let base = pattern.with_zero();
    let interior = |bound: u64| -> Vec<u64> {
        (1..bound)
            .filter(|m| !pattern.diffs().contains(m))
            .collect()
    };
    let terms = |set: &[u64], max_i: usize| -> Result<Vec<u64>> {
        (0..=max_i)
            .map(|i| {
                let mut total = 0u64;
                for extra in set.iter().copied().combinations(i) {
                    let mut offs = base.clone();
                    offs.extend(extra);
                    total += pi_tuple_with(table, x, &offs)?;
                }
                Ok(total)
            })
            .collect()
    };
    let lower_terms = terms(&interior(dk), 2 * depth + 1)?;
    let upper_terms = terms(&interior(h), 2 * depth)?;

    let census = run_census(&[x], pattern.k(), AnchorConvention::SmallestLeX)?[0].count(pattern);
    Ok(BonferroniReport {
        x,
        pattern: pattern.clone(),
        depth,
        h,
        census,
        lower: alternating(&lower_terms),
        upper: alternating(&upper_terms),
        lower_terms,
        upper_terms,
    })
}

fn alternating(terms: &[u64]) -> i128 {
    terms
        .iter()
        .enumerate()
        .map(|(i, &t)| if i % 2 == 0 { t as i128 } else { -(t as i128) })
        .sum()
}

// sum_{i <= max_i} C(n, i)
fn subset_count(n: usize, max_i: usize) -> u128 {
    let mut c = 1u128;
    let mut total = 0u128;
    for i in 0..=max_i.min(n) {
        total = total.saturating_add(c);
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    total
}
