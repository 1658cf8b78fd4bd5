//! Averages of the singular series and the local algebra behind them.
//!
//! Extending `D` by one offset `d0` multiplies each local factor by
//! `1 + a(p, v')`, where `v = ν_D(p)`, `v' = ν_{D ∪ {d0}}(p) ∈ {v, v + 1}` and
//!
//! ```text
//! a(p, v') = ((v - v' + 1) p - v) / ((p - v)(p - 1)).
//! ```
//!
//! Of the `p` residues of `d0`, `v` keep `v' = v` and `p - v` give
//! `v' = v + 1`; weighting `a` by these counts sums to exactly zero.

use itertools::Itertools;
use num_bigint::BigInt;
use serde::Serialize;
use std::io::Write;

use crate::error::{domain, CoreError, Result};
use crate::exec::NeumaierSum;
use crate::gap_census::TableMeta;
use crate::rational::ExactRational;
use crate::singular_series::{local_factor, normalize, nu, nu_offsets, SeriesEvaluator};

/// `1 - γ - log 2π`, the constant in the second-order average.
pub const MS_CONSTANT: f64 = 1.0 - EULER_GAMMA - 1.837_877_066_409_345_5;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Work budget for [`orw_average`], in singular-series evaluations.
pub const ORW_BUDGET: u128 = 5_000_000;

/// `a(p, v')` as an exact rational; requires `v < p`.
pub fn a_coefficient(p: u64, nu_base: u64, nu_ext: u64) -> Result<ExactRational> {
    if nu_base >= p {
        return domain(format!("a(p, ·) is undefined when ν = p = {p}"));
    }
    if nu_ext != nu_base && nu_ext != nu_base + 1 {
        return domain(format!(
            "extension ν {nu_ext} is not ν or ν + 1 for ν = {nu_base}"
        ));
    }
    let (p, v, w) = (p as i128, nu_base as i128, nu_ext as i128);
    Ok(ExactRational::new(
        BigInt::from((v - w + 1) * p - v),
        BigInt::from((p - v) * (p - 1)),
    ))
}

/// Residues of `d0` mod `p` that lead to `v'`.
pub fn f_count(p: u64, nu_base: u64, nu_ext: u64) -> u64 {
    if nu_ext == nu_base {
        nu_base
    } else {
        p - nu_base
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioTerm {
    pub p: u64,
    pub nu_base: u64,
    pub nu_ext: u64,
    pub a_value: ExactRational,
    pub f_value: u64,
}

impl RatioTerm {
    /// `(1 + a) · local_factor(D, p) == local_factor(D ∪ {d0}, p)` exactly.
    pub fn check_factorization(&self, set: &[i64], d0: i64) -> Result<bool> {
        let mut ext = set.to_vec();
        ext.push(d0);
        let lhs = (ExactRational::one() + self.a_value.clone()) * local_factor(set, self.p)?;
        Ok(lhs == local_factor(&ext, self.p)?)
    }
}

pub fn ratio_term(set: &[i64], d0: i64, p: u64) -> Result<RatioTerm> {
    if set.contains(&d0) {
        return domain(format!("d0 = {d0} already lies in the set"));
    }
    let nu_base = nu(set, p)?;
    let mut ext = set.to_vec();
    ext.push(d0);
    let nu_ext = nu(&ext, p)?;
    Ok(RatioTerm {
        p,
        nu_base,
        nu_ext,
        a_value: a_coefficient(p, nu_base, nu_ext)?,
        f_value: f_count(p, nu_base, nu_ext),
    })
}

/// Result of `Σ_{v'} a(p, v') f(p, v')`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AIdentity {
    /// The weighted sum, as an exact rational.
    Sum(ExactRational),
    /// `ν = p`: every residue is occupied and the `v + 1` branch is empty.
    FullOccupancy,
}

impl AIdentity {
    pub fn is_exact_zero(&self) -> bool {
        match self {
            AIdentity::Sum(s) => s.is_zero(),
            AIdentity::FullOccupancy => true,
        }
    }
}

pub fn verify_a_identity(p: u64, set: &[i64]) -> Result<AIdentity> {
    let v = nu(set, p)?;
    if v == p {
        return Ok(AIdentity::FullOccupancy);
    }
    let stay = a_coefficient(p, v, v)? * ExactRational::from(f_count(p, v, v) as i64);
    let grow = a_coefficient(p, v, v + 1)? * ExactRational::from(f_count(p, v, v + 1) as i64);
    Ok(AIdentity::Sum(stay + grow))
}

/// `𝔖(D ∪ {d0}) / 𝔖(D)` computed along two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioValue {
    /// Quotient of the two truncated products.
    pub quotient: f64,
    /// Direct product of `1 + a(p, ·)` over the same primes.
    pub product: f64,
    /// Combined log-tail bound of both truncations.
    pub tail_bound: f64,
    pub zero_flag: bool,
}

impl RatioValue {
    pub fn paths_agree(&self) -> bool {
        if self.zero_flag {
            return self.quotient == 0.0 && self.product == 0.0;
        }
        (self.quotient.ln() - self.product.ln()).abs() <= self.tail_bound
    }
}

pub fn ratio_s(set: &[i64], d0: i64, series: &SeriesEvaluator) -> Result<RatioValue> {
    if set.contains(&d0) {
        return domain(format!("d0 = {d0} already lies in the set"));
    }
    let base = series.evaluate(set)?;
    if base.zero_flag {
        return domain("the base singular series vanishes");
    }
    let mut ext = set.to_vec();
    ext.push(d0);
    let extended = series.evaluate(&ext)?;
    let quotient = if extended.zero_flag {
        0.0
    } else {
        (extended.log_value - base.log_value).exp()
    };

    // product route: Σ log(1 + a); ν is translation invariant
    let base_offs = normalize(set)?;
    let ext_offs = normalize(&ext)?;
    let span = *ext_offs.last().expect("nonempty");
    let mut acc = NeumaierSum::new();
    let mut zero = false;
    let mut scratch = Vec::new();
    for &p in series.primes() {
        let (v, w) = if p <= span {
            (
                nu_offsets(&base_offs, p, &mut scratch),
                nu_offsets(&ext_offs, p, &mut scratch),
            )
        } else {
            (base_offs.len() as u64, ext_offs.len() as u64)
        };
        if w == p {
            zero = true;
            break;
        }
        let (pf, vf) = (p as f64, v as f64);
        let a = ((vf - w as f64 + 1.0) * pf - vf) / ((pf - vf) * (pf - 1.0));
        acc.add(a.ln_1p());
    }
    let product = if zero { 0.0 } else { acc.value().exp() };
    Ok(RatioValue {
        quotient,
        product,
        tail_bound: base.tail_bound + extended.tail_bound,
        zero_flag: extended.zero_flag || zero,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub set: Vec<i64>,
    /// Upper end of the `d0` range.
    pub h_range: u64,
    /// `max(D)`, so that `D ⊂ [0, h]`.
    pub h_span: u64,
    pub sum: f64,
    pub deviation: f64,
    /// `deviation / sqrt(H)`.
    pub normalized: f64,
    /// `𝔖(D) = 0`: every term vanishes.
    pub trivial: bool,
    pub terms: u64,
}

/// `Σ_{1≤d0≤H, d0∉D} 𝔖(D ∪ {d0}) / 𝔖(D)`, compared with `H`.
pub fn average_ratio_sum(
    set: &[i64],
    h_range: u64,
    series: &SeriesEvaluator,
) -> Result<AverageReport> {
    if h_range == 0 {
        return domain("H must be >= 1");
    }
    if set.is_empty() || set.iter().any(|&d| d < 0) {
        return domain("the set must be nonempty with nonnegative elements");
    }
    let h_span = *set.iter().max().expect("nonempty") as u64;
    let base = series.evaluate(set)?;
    if base.zero_flag {
        return Ok(AverageReport {
            set: set.to_vec(),
            h_range,
            h_span,
            sum: 0.0,
            deviation: 0.0,
            normalized: 0.0,
            trivial: true,
            terms: 0,
        });
    }
    let d0s: Vec<i64> = (1..=h_range as i64).filter(|d| !set.contains(d)).collect();
    let ratios = series.exec().map(&d0s, |&d0| -> Result<f64> {
        let mut ext = set.to_vec();
        ext.push(d0);
        let s = series.evaluate(&ext)?;
        Ok(if s.zero_flag {
            0.0
        } else {
            (s.log_value - base.log_value).exp()
        })
    });
    let mut acc = NeumaierSum::new();
    for r in ratios {
        acc.add(r?);
    }
    let sum = acc.value();
    let deviation = (sum - h_range as f64).abs();
    Ok(AverageReport {
        set: set.to_vec(),
        h_range,
        h_span,
        sum,
        deviation,
        normalized: deviation / (h_range as f64).sqrt(),
        trivial: false,
        terms: d0s.len() as u64,
    })
}

/// Rows `D,H,sum,deviation,normalized`; `D` is `;`-joined.
pub fn write_average_csv<W: Write>(
    reports: &[AverageReport],
    meta: &TableMeta,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{}", meta.header_line())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["D", "H", "sum", "deviation", "normalized"])?;
    for r in reports {
        out.write_record([
            r.set.iter().join(";"),
            r.h_range.to_string(),
            r.sum.to_string(),
            r.deviation.to_string(),
            r.normalized.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GallagherReport {
    pub k: usize,
    pub d_limit: u64,
    /// Ordered tuples of distinct elements summed over.
    pub tuples: u64,
    pub brute_sum: f64,
    /// `D^k`
    pub leading: f64,
    /// `D^k - C(k,2) D^{k-1} log D + C(k,2)(1 - γ - log 2π) D^{k-1}`
    pub three_term: f64,
    pub rel_err_leading: f64,
    pub rel_err_three_term: f64,
}

/// Brute-force `Σ 𝔖(D_k)` over distinct `1 <= d_1, ..., d_k <= D`.
pub fn gallagher_ms_average(
    k: usize,
    d_limit: u64,
    series: &SeriesEvaluator,
) -> Result<GallagherReport> {
    let max = match k {
        2 => 300,
        3 => 60,
        _ => return domain(format!("k must be 2 or 3, got {k}")),
    };
    if d_limit > max {
        return Err(CoreError::Budget {
            what: format!("Gallagher average for k = {k}"),
            required: (d_limit as u128).pow(k as u32),
            budget: (max as u128).pow(k as u32),
        });
    }
    if d_limit < k as u64 {
        return domain(format!("D = {d_limit} admits no {k} distinct elements"));
    }
    let firsts: Vec<i64> = (1..=d_limit as i64).collect();
    let partials = series
        .exec()
        .map(&firsts, |&d1| -> Result<(NeumaierSum, u64)> {
            let mut acc = NeumaierSum::new();
            let mut count = 0;
            for rest in (1..=d_limit as i64)
                .filter(|&d| d != d1)
                .permutations(k - 1)
            {
                let mut set = rest;
                set.push(d1);
                acc.add(series.evaluate(&set)?.value);
                count += 1;
            }
            Ok((acc, count))
        });
    let mut total = NeumaierSum::new();
    let mut tuples = 0;
    for part in partials {
        let (acc, count) = part?;
        total.add(acc.value());
        tuples += count;
    }
    let brute_sum = total.value();
    let d = d_limit as f64;
    let pairs = (k * (k - 1) / 2) as f64;
    let leading = d.powi(k as i32);
    let lower = d.powi(k as i32 - 1);
    let three_term = leading - pairs * lower * d.ln() + pairs * MS_CONSTANT * lower;
    Ok(GallagherReport {
        k,
        d_limit,
        tuples,
        brute_sum,
        leading,
        three_term,
        rel_err_leading: (leading / brute_sum - 1.0).abs(),
        rel_err_three_term: (three_term / brute_sum - 1.0).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrwReport {
    pub k: usize,
    pub d: u64,
    pub h: u64,
    pub terms: u64,
    pub brute_sum: f64,
    /// `𝔖({0, D}) H^{k-2} / (k-2)!`
    pub main_term: f64,
    pub relative_error: f64,
    /// `relative_error · sqrt(H)`
    pub normalized: f64,
    /// No `d_i` fits strictly inside `(0, H)`.
    pub degenerate: bool,
}

/// `Σ_{1≤d_1<…<d_{k-2}<H} 𝔖(0, d_1, …, d_{k-2}, D)` against its main term.
pub fn orw_average(k: usize, d: u64, h: u64, series: &SeriesEvaluator) -> Result<OrwReport> {
    if k < 3 {
        return domain(format!("k must be >= 3, got {k}"));
    }
    if h == 0 || h > d {
        return domain(format!("H must satisfy 1 <= H <= D, got H = {h}, D = {d}"));
    }
    let inner = k - 2;
    let pool = h - 1;
    let mut required = 1u128;
    for i in 0..inner as u128 {
        required = required.saturating_mul((pool as u128).saturating_sub(i)) / (i + 1);
    }
    if required > ORW_BUDGET {
        return Err(CoreError::Budget {
            what: format!("ORW average k = {k}, H = {h}"),
            required,
            budget: ORW_BUDGET,
        });
    }
    let combos: Vec<Vec<i64>> = (1..h as i64).combinations(inner).collect();
    let values = series.exec().map(&combos, |c| -> Result<f64> {
        let mut set = Vec::with_capacity(k);
        set.push(0);
        set.extend_from_slice(c);
        set.push(d as i64);
        Ok(series.evaluate(&set)?.value)
    });
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v?);
    }
    let brute_sum = acc.value();
    let pair = series.evaluate(&[0, d as i64])?.value;
    let factorial: f64 = (1..=inner).map(|i| i as f64).product();
    let main_term = pair * (h as f64).powi(inner as i32) / factorial;
    let relative_error = if main_term == 0.0 {
        if brute_sum == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        brute_sum / main_term - 1.0
    };
    Ok(OrwReport {
        k,
        d,
        h,
        terms: combos.len() as u64,
        brute_sum,
        main_term,
        relative_error,
        normalized: relative_error * (h as f64).sqrt(),
        degenerate: combos.is_empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d)
    }

    #[test]
    fn a_identity_examples() {
        // p = 5, D = {0,2}: ν = 2
        assert_eq!(a_coefficient(5, 2, 3).unwrap(), r(-1, 6));
        assert_eq!(f_count(5, 2, 3), 3);
        assert_eq!(a_coefficient(5, 2, 2).unwrap(), r(1, 4));
        assert_eq!(f_count(5, 2, 2), 2);
        assert_eq!(
            verify_a_identity(5, &[0, 2]).unwrap(),
            AIdentity::Sum(ExactRational::zero())
        );
        assert!(verify_a_identity(3, &[0, 2]).unwrap().is_exact_zero());
        assert!(verify_a_identity(2, &[0, 2]).unwrap().is_exact_zero());
        assert_eq!(
            verify_a_identity(3, &[0, 1, 2]).unwrap(),
            AIdentity::FullOccupancy
        );
        assert!(verify_a_identity(4, &[0, 2]).is_err());
    }

    #[test]
    fn a_coefficient_domain() {
        assert!(a_coefficient(3, 3, 3).is_err());
        assert!(a_coefficient(7, 2, 4).is_err());
    }

    #[test]
    fn ratio_term_factorizes() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let t = ratio_term(&[0, 2, 6], 8, p).unwrap();
            assert!(t.check_factorization(&[0, 2, 6], 8).unwrap(), "p = {p}");
        }
        assert!(ratio_term(&[0, 2], 2, 3).is_err());
    }

    #[test]
    fn ratio_examples() {
        let ev = SeriesEvaluator::new(100_000).unwrap();
        let r = ratio_s(&[0], 2, &ev).unwrap();
        let twin = ev.evaluate(&[0, 2]).unwrap().value;
        assert!((r.quotient - twin).abs() < 1e-14);
        assert!((r.quotient - 1.3203).abs() < 1e-4);
        assert!(r.paths_agree());
        let z = ratio_s(&[0, 2], 4, &ev).unwrap();
        assert!(z.zero_flag && z.quotient == 0.0 && z.product == 0.0);
        assert!(ratio_s(&[0, 2, 4], 8, &ev).is_err());
        assert!(ratio_s(&[0, 2], 2, &ev).is_err());
    }

    #[test]
    fn ratio_paths_agree_for_shifted_sets() {
        let ev = SeriesEvaluator::new(10_000).unwrap();
        for (set, d0) in [
            (vec![4i64, 10], 1i64),
            (vec![0, 6, 12], 30),
            (vec![5, 7], 11),
        ] {
            let r = ratio_s(&set, d0, &ev).unwrap();
            assert!(r.paths_agree(), "{set:?} + {d0}: {r:?}");
        }
    }

    #[test]
    fn trivial_average() {
        let ev = SeriesEvaluator::new(1000).unwrap();
        let rep = average_ratio_sum(&[0, 2, 4], 50, &ev).unwrap();
        assert!(rep.trivial);
        assert_eq!(rep.sum, 0.0);
        assert!(average_ratio_sum(&[0], 0, &ev).is_err());
    }

    #[test]
    fn gallagher_small_enumeration() {
        let ev = SeriesEvaluator::new(10_000).unwrap();
        let rep = gallagher_ms_average(2, 10, &ev).unwrap();
        assert_eq!(rep.tuples, 90);
        // each unordered pair counted twice
        let mut oracle = 0.0;
        for a in 1..=10i64 {
            for b in (a + 1)..=10 {
                oracle += 2.0 * ev.evaluate(&[a, b]).unwrap().value;
            }
        }
        assert!((rep.brute_sum - oracle).abs() < 1e-12 * oracle);
        assert!(gallagher_ms_average(4, 10, &ev).is_err());
        assert!(matches!(
            gallagher_ms_average(2, 301, &ev),
            Err(CoreError::Budget { .. })
        ));
        assert!(matches!(
            gallagher_ms_average(3, 61, &ev),
            Err(CoreError::Budget { .. })
        ));
    }

    #[test]
    fn ms_constant_value() {
        // γ from H_n - log n - 1/(2n) + 1/(12 n^2) at n = 10^6
        let n = 1_000_000u64;
        let harmonic: NeumaierSum = (1..=n).map(|i| 1.0 / i as f64).collect();
        let nf = n as f64;
        let gamma = harmonic.value() - nf.ln() - 1.0 / (2.0 * nf) + 1.0 / (12.0 * nf * nf);
        assert!((gamma - EULER_GAMMA).abs() < 1e-12);
        let oracle = 1.0 - gamma - (2.0 * std::f64::consts::PI).ln();
        assert!((MS_CONSTANT - oracle).abs() < 1e-12);
        assert!((MS_CONSTANT + 1.41509).abs() < 1e-5);
    }

    #[test]
    fn orw_edges() {
        let ev = SeriesEvaluator::new(10_000).unwrap();
        let deg = orw_average(3, 50, 1, &ev).unwrap();
        assert!(deg.degenerate);
        assert_eq!(deg.brute_sum, 0.0);
        assert_eq!(deg.terms, 0);
        let four = orw_average(4, 40, 20, &ev).unwrap();
        assert_eq!(four.terms, 171);
        let three = orw_average(3, 50, 50, &ev).unwrap();
        assert_eq!(three.terms, 49);
        assert!(orw_average(2, 50, 10, &ev).is_err());
        assert!(orw_average(3, 50, 51, &ev).is_err());
    }
}
