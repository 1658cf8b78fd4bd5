//! Primorials, gcd decomposition, Δ-products and Mertens sums.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, One};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exec::NeumaierSum;
use crate::gap_census::GapPattern;
use crate::prime_engine::primes_vec;

/// Mertens' constant `B` in `Σ_{p≤x} 1/p = log log x + B + o(1)`.
pub const MERTENS_CONSTANT: f64 = 0.261_497_212_847_642_8;

/// `D = d · D'` with `gcd(D') = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GcdDecomposition {
    pub d: u64,
    pub reduced: GapPattern,
}

pub fn gcd_decompose(pattern: &GapPattern) -> GcdDecomposition {
    let d = pattern.gcd();
    let reduced = GapPattern::new(pattern.diffs().iter().map(|&x| x / d).collect())
        .expect("dividing by a common factor keeps the order");
    GcdDecomposition { d, reduced }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut bound = 64u64;
    loop {
        let ps = primes_vec(bound);
        if ps.len() >= count {
            return ps[..count].to_vec();
        }
        bound *= 2;
    }
}

/// Product of the first `n` primes.
pub fn primorial(n: usize) -> Result<BigUint> {
    if n == 0 {
        return domain("primorial index must be >= 1");
    }
    Ok(first_primes(n).into_iter().map(BigUint::from).product())
}

/// Largest primorial not exceeding `y`.
pub fn floor_primorial(y: f64) -> Result<BigUint> {
    if !(y >= 2.0) || !y.is_finite() {
        return domain(format!("no primorial is <= {y}"));
    }
    let bound = BigUint::from_f64(y.floor()).expect("finite and positive");
    let mut best = BigUint::one();
    let mut bound_p = 64u64;
    let mut idx = 0;
    loop {
        let ps = primes_vec(bound_p);
        while idx < ps.len() {
            let next = &best * ps[idx];
            if next > bound {
                return Ok(best);
            }
            best = next;
            idx += 1;
        }
        bound_p *= 2;
    }
}

/// `∏_{j<i} (d_i - d_j)` over the sorted elements.
pub fn delta_product(elements: &[i64]) -> Result<BigUint> {
    let mut v = elements.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return domain(format!("elements of {elements:?} are not distinct"));
    }
    let mut acc = BigUint::one();
    for i in 0..v.len() {
        for j in 0..i {
            acc *= (v[i] as i128 - v[j] as i128) as u128;
        }
    }
    Ok(acc)
}

/// `Σ_{p≤x} 1/p` with compensated summation.
pub fn mertens_sum(x: u64) -> Result<f64> {
    if x < 3 {
        return domain(format!("x must be >= 3, got {x}"));
    }
    let acc: NeumaierSum = primes_vec(x).into_iter().map(|p| 1.0 / p as f64).collect();
    Ok(acc.value())
}

/// `Σ_{p≤x} 1/p - log log x`.
pub fn mertens_constant_estimate(x: u64) -> Result<f64> {
    Ok(mertens_sum(x)? - (x as f64).ln().ln())
}
