//! Singular series `𝔖(D) = ∏_p (1 - 1/p)^{-n} (1 - ν_D(p)/p)`.
//!
//! Local factors are available as exact rationals. The truncated product is
//! accumulated in log space with compensated summation; the omitted tail is
//! bounded by `n² / (P - 1)` in absolute log terms, valid once every omitted
//! prime exceeds both the span of `D` and `2n²`.

mod arith;

use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{domain, CoreError, Result};
use crate::exec::{Exec, NeumaierSum};
use crate::prime_engine::{is_prime, primes_vec};
use crate::rational::ExactRational;

pub use arith::{
    delta_product, floor_primorial, gcd_decompose, mertens_constant_estimate, mertens_sum,
    primorial, GcdDecomposition, MERTENS_CONSTANT,
};

/// Translate a set so its minimum is 0; sorted, duplicates removed.
pub fn normalize(set: &[i64]) -> Result<Vec<u64>> {
    let Some(&min) = set.iter().min() else {
        return domain("the offset set must be nonempty");
    };
    let mut out: Vec<u64> = set
        .iter()
        .map(|&d| (d as i128 - min as i128) as u64)
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Number of residue classes mod `p` hit by the (normalized) offsets.
pub(crate) fn nu_offsets(offsets: &[u64], p: u64, scratch: &mut Vec<u64>) -> u64 {
    if p <= 64 {
        let mask = offsets.iter().fold(0u64, |m, &d| m | 1 << (d % p));
        return mask.count_ones() as u64;
    }
    scratch.clear();
    scratch.extend(offsets.iter().map(|&d| d % p));
    scratch.sort_unstable();
    scratch.dedup();
    scratch.len() as u64
}

/// `ν_D(p)`: distinct residue classes mod `p` occupied by `D`.
pub fn nu(set: &[i64], p: u64) -> Result<u64> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    let offs = normalize(set)?;
    Ok(nu_offsets(&offs, p, &mut Vec::new()))
}

/// Exact `(1 - 1/p)^{-n} (1 - ν/p) = p^{n-1} (p - ν) / (p - 1)^n`.
pub fn local_factor(set: &[i64], p: u64) -> Result<ExactRational> {
    let v = nu(set, p)?;
    let n = normalize(set)?.len() as u32;
    Ok(local_factor_from(p, n, v))
}

pub(crate) fn local_factor_from(p: u64, n: u32, nu: u64) -> ExactRational {
    let pb = BigInt::from(p);
    let numer = pb.pow(n - 1) * BigInt::from(p - nu);
    let denom = BigInt::from(p - 1).pow(n);
    ExactRational::new(numer, denom)
}

#[inline]
fn log_local_factor(p: u64, n: u64, nu: u64) -> f64 {
    let pf = p as f64;
    (-(nu as f64) / pf).ln_1p() - n as f64 * (-1.0 / pf).ln_1p()
}

/// Truncated singular series with a certified multiplicative enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularSeriesValue {
    pub value: f64,
    /// `ln(value)`; `-inf` when the series vanishes.
    pub log_value: f64,
    pub truncation_prime: u64,
    /// The full product lies in `value · exp(±tail_bound)`.
    pub tail_bound: f64,
    pub zero_flag: bool,
}

impl SingularSeriesValue {
    fn zero(truncation_prime: u64) -> Self {
        SingularSeriesValue {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            truncation_prime,
            tail_bound: 0.0,
            zero_flag: true,
        }
    }

    pub fn lower(&self) -> f64 {
        self.value * (-self.tail_bound).exp()
    }

    pub fn upper(&self) -> f64 {
        self.value * self.tail_bound.exp()
    }

    pub fn encloses(&self, v: f64) -> bool {
        self.lower() <= v && v <= self.upper()
    }
}

/// Smallest admissible truncation prime bound for an `n`-element set of span `span`.
pub fn min_truncation(n: usize, span: u64) -> u64 {
    let n = n as u64;
    span.max(n + 1).max(2 * n * n)
}

/// Evaluates many singular series against one prime table.
///
/// For primes above the span of `D` the local factor depends only on `n`,
/// so its suffix sums are computed once per `n` and shared.
#[derive(Debug)]
pub struct SeriesEvaluator {
    truncation_prime: u64,
    primes: Vec<u64>,
    exec: Exec,
    suffix: Mutex<FxHashMap<u64, Arc<Suffix>>>,
}

#[derive(Debug)]
struct Suffix {
    // sum of log factors over primes with index >= i (ν = n)
    sums: Vec<f64>,
}

impl SeriesEvaluator {
    pub fn new(truncation_prime: u64) -> Result<Self> {
        Self::with_exec(truncation_prime, Exec::default())
    }

    pub fn with_exec(truncation_prime: u64, exec: Exec) -> Result<Self> {
        if truncation_prime < 2 {
            return Err(CoreError::Truncation {
                given: truncation_prime,
                required: 2,
            });
        }
        Ok(SeriesEvaluator {
            truncation_prime,
            primes: primes_vec(truncation_prime),
            exec,
            suffix: Mutex::new(FxHashMap::default()),
        })
    }

    pub fn truncation_prime(&self) -> u64 {
        self.truncation_prime
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    fn suffix_for(&self, n: u64) -> Arc<Suffix> {
        let mut cache = self.suffix.lock().expect("suffix cache poisoned");
        if let Some(s) = cache.get(&n) {
            return Arc::clone(s);
        }
        let terms = self.exec.map(&self.primes, |&p| {
            if p > n {
                log_local_factor(p, n, n)
            } else {
                0.0
            }
        });
        let mut sums = vec![0.0; terms.len() + 1];
        let mut acc = NeumaierSum::new();
        for i in (0..terms.len()).rev() {
            acc.add(terms[i]);
            sums[i] = acc.value();
        }
        let s = Arc::new(Suffix { sums });
        cache.insert(n, Arc::clone(&s));
        s
    }

    /// `𝔖(D)` truncated at the configured prime bound.
    pub fn evaluate(&self, set: &[i64]) -> Result<SingularSeriesValue> {
        let offs = normalize(set)?;
        self.evaluate_normalized(&offs)
    }

    pub(crate) fn evaluate_normalized(&self, offs: &[u64]) -> Result<SingularSeriesValue> {
        let n = offs.len() as u64;
        let span = *offs.last().expect("nonempty");
        let required = min_truncation(offs.len(), span);
        if self.truncation_prime < required {
            return Err(CoreError::Truncation {
                given: self.truncation_prime,
                required,
            });
        }
        let mut scratch = Vec::new();
        let mut acc = NeumaierSum::new();
        let mut abs_small = 0.0;
        let mut idx = 0;
        // beyond max(span, n) every residue is distinct and ν = n < p
        while idx < self.primes.len() && self.primes[idx] <= span.max(n) {
            let p = self.primes[idx];
            let v = nu_offsets(offs, p, &mut scratch);
            if v == p {
                return Ok(SingularSeriesValue::zero(self.truncation_prime));
            }
            let t = log_local_factor(p, n, v);
            abs_small += t.abs();
            acc.add(t);
            idx += 1;
        }
        let suffix = self.suffix_for(n).sums[idx];
        acc.add(suffix);
        let log_value = acc.value();
        let truncation = if n == 1 {
            0.0
        } else {
            (n * n) as f64 / (self.truncation_prime - 1) as f64
        };
        let rounding = 8.0 * f64::EPSILON * (abs_small + suffix.abs() + 1.0);
        Ok(SingularSeriesValue {
            value: log_value.exp(),
            log_value,
            truncation_prime: self.truncation_prime,
            tail_bound: truncation + rounding,
            zero_flag: false,
        })
    }
}

/// One-shot `𝔖(D)` truncated at primes `<= truncation_prime`.
pub fn singular_series(set: &[i64], truncation_prime: u64) -> Result<SingularSeriesValue> {
    let offs = normalize(set)?;
    let required = min_truncation(offs.len(), *offs.last().expect("nonempty"));
    if truncation_prime < required {
        return Err(CoreError::Truncation {
            given: truncation_prime,
            required,
        });
    }
    SeriesEvaluator::new(truncation_prime)?.evaluate_normalized(&offs)
}
