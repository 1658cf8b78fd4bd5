//! Hardy–Littlewood predictions for prime tuples and consecutive-prime
//! patterns.
//!
//! Main terms are reported in two forms: the logarithmic integral
//! `𝔖 · ∫_2^x dt/log^n t` and the cruder `𝔖 · x / log^n x`. The corrected
//! pattern prediction multiplies the main term by `1 - d_k / log x`.

mod quad;

use serde::Serialize;

use crate::error::{domain, CoreError, Result};
use crate::exec::Exec;
use crate::gap_census::GapPattern;
use crate::singular_series::{normalize, primorial, SeriesEvaluator, SingularSeriesValue};

pub use quad::{li_power, LI_REL_TOL};

/// Truncation prime used when none is given.
pub const DEFAULT_TRUNCATION: u64 = 1_000_000;

/// Upper limit on the number of candidate patterns enumerated for ranking.
pub const CANDIDATE_BUDGET: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiTuplePrediction {
    pub x: u64,
    pub n: usize,
    pub singular_series: SingularSeriesValue,
    /// `𝔖 · ∫_2^x dt / log^n t`
    pub integral_form: f64,
    /// `𝔖 · x / log^n x`
    pub simple_form: f64,
    pub zero_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub x: u64,
    pub pattern: GapPattern,
    /// `𝔖({0} ∪ D)`
    pub singular_series: f64,
    pub main_term: f64,
    pub main_term_simple: f64,
    /// `1 - d_k / log x`
    pub correction_factor: f64,
    pub corrected: f64,
    pub corrected_simple: f64,
    /// `2^n n! 𝔖 x / log^n x` with `n = k + 1`; `None` when `𝔖 = 0`.
    pub sieve_upper: Option<f64>,
    /// Set when `d_k >= log x`, outside the regime of the correction.
    pub regime_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPrediction {
    /// Competition rank: tied predictions share a rank.
    pub rank: usize,
    pub prediction: Prediction,
}

/// Candidate patterns for champion prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateFamily {
    Explicit(Vec<GapPattern>),
    /// Every `k`-pattern with `d_k <= dmax`.
    UpTo {
        dmax: u64,
    },
    /// Every pattern with `d_k <= ceil(3 k log x)`, plus primorial multiples
    /// `m · {1, ..., k}` with `m k <= log^{k+1} x`.
    Default,
}

impl CandidateFamily {
    pub fn candidates(&self, x: u64, k: usize) -> Result<Vec<GapPattern>> {
        if k == 0 {
            return domain("k must be >= 1");
        }
        let log_x = (x as f64).ln();
        match self {
            CandidateFamily::Explicit(v) => {
                if let Some(p) = v.iter().find(|p| p.k() != k) {
                    return domain(format!("pattern {p} does not have k = {k} elements"));
                }
                Ok(v.clone())
            }
            CandidateFamily::UpTo { dmax } => all_patterns(k, *dmax),
            CandidateFamily::Default => {
                let cutoff = (3.0 * k as f64 * log_x).ceil() as u64;
                let mut out = all_patterns(k, cutoff)?;
                let reach = log_x.powi(k as i32 + 1);
                for idx in 1.. {
                    let m = primorial(idx)?;
                    let m: u64 = match m.try_into() {
                        Ok(m) => m,
                        Err(_) => break,
                    };
                    if (m * k as u64) as f64 > reach {
                        break;
                    }
                    if m * k as u64 > cutoff {
                        let diffs = (1..=k as u64).map(|i| i * m).collect();
                        out.push(GapPattern::new(diffs)?);
                    }
                }
                Ok(out)
            }
        }
    }
}

fn all_patterns(k: usize, dmax: u64) -> Result<Vec<GapPattern>> {
    if (dmax as usize) < k {
        return Ok(Vec::new());
    }
    let mut count = 1u128;
    for i in 0..k as u128 {
        count = count * (dmax as u128 - i) / (i + 1);
    }
    if count > CANDIDATE_BUDGET {
        return Err(CoreError::Budget {
            what: format!("enumerating {k}-patterns up to {dmax}"),
            required: count,
            budget: CANDIDATE_BUDGET,
        });
    }
    use itertools::Itertools;
    (1..=dmax).combinations(k).map(GapPattern::new).collect()
}

/// Prediction engine bound to one singular-series truncation.
#[derive(Debug)]
pub struct HlModel {
    series: SeriesEvaluator,
}

impl HlModel {
    pub fn new(truncation_prime: u64) -> Result<Self> {
        Ok(HlModel {
            series: SeriesEvaluator::new(truncation_prime)?,
        })
    }

    pub fn with_exec(truncation_prime: u64, exec: Exec) -> Result<Self> {
        Ok(HlModel {
            series: SeriesEvaluator::with_exec(truncation_prime, exec)?,
        })
    }

    pub fn evaluator(&self) -> &SeriesEvaluator {
        &self.series
    }

    /// `π_n(x, D) ≈ 𝔖(D) ∫_2^x dt / log^n t`.
    pub fn predict_pi_tuple(&self, x: u64, set: &[i64]) -> Result<PiTuplePrediction> {
        if x < 2 {
            return domain(format!("x must be >= 2, got {x}"));
        }
        let n = normalize(set)?.len();
        let s = self.series.evaluate(set)?;
        let xf = x as f64;
        let (integral_form, simple_form) = if s.zero_flag {
            (0.0, 0.0)
        } else {
            (
                s.value * li_power(xf, n as u32)?,
                s.value * xf / xf.ln().powi(n as i32),
            )
        };
        Ok(PiTuplePrediction {
            x,
            n,
            singular_series: s,
            integral_form,
            simple_form,
            zero_flag: s.zero_flag,
        })
    }

    /// Corrected prediction of `N_k(x, D)`.
    pub fn predict_n(&self, x: u64, pattern: &GapPattern) -> Result<Prediction> {
        let set: Vec<i64> = pattern.with_zero().into_iter().map(|d| d as i64).collect();
        let tuple = self.predict_pi_tuple(x, &set)?;
        let log_x = (x as f64).ln();
        let dk = pattern.largest() as f64;
        let correction_factor = correction_factor(log_x, pattern.largest());
        let sieve_upper = if tuple.zero_flag {
            None
        } else {
            Some(sieve_bound_from(x, tuple.n, tuple.singular_series.value))
        };
        Ok(Prediction {
            x,
            pattern: pattern.clone(),
            singular_series: tuple.singular_series.value,
            main_term: tuple.integral_form,
            main_term_simple: tuple.simple_form,
            correction_factor,
            corrected: tuple.integral_form * correction_factor,
            corrected_simple: tuple.simple_form * correction_factor,
            sieve_upper,
            regime_warning: dk >= log_x,
        })
    }

    /// `2^n n! 𝔖(D) x / log^n x`; undefined when `𝔖(D) = 0`.
    pub fn sieve_upper_bound(&self, x: u64, set: &[i64]) -> Result<f64> {
        if x < 2 {
            return domain(format!("x must be >= 2, got {x}"));
        }
        let n = normalize(set)?.len();
        let s = self.series.evaluate(set)?;
        if s.zero_flag {
            return domain("the sieve bound is undefined for a vanishing singular series");
        }
        Ok(sieve_bound_from(x, n, s.value))
    }

    /// Rank the family's patterns with nonzero singular series by corrected
    /// prediction, largest first. Ties share a rank and are listed in
    /// pattern order.
    pub fn predict_champion(
        &self,
        x: u64,
        k: usize,
        family: &CandidateFamily,
    ) -> Result<Vec<RankedPrediction>> {
        let candidates = family.candidates(x, k)?;
        if candidates.is_empty() {
            return domain("the candidate family is empty");
        }
        let preds = self
            .series
            .exec()
            .map(&candidates, |p| self.predict_n(x, p));
        let preds: Vec<Prediction> = preds
            .into_iter()
            .filter(|p| !matches!(p, Ok(pred) if pred.singular_series == 0.0))
            .collect::<Result<_>>()?;
        Ok(rank_predictions(preds))
    }
}

/// Competition ranking by corrected value, largest first; ties share a
/// rank and are listed in pattern order.
pub fn rank_predictions(mut preds: Vec<Prediction>) -> Vec<RankedPrediction> {
    preds.sort_by(|a, b| {
        b.corrected
            .total_cmp(&a.corrected)
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    let mut out: Vec<RankedPrediction> = Vec::with_capacity(preds.len());
    for (i, p) in preds.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.prediction.corrected == p.corrected => prev.rank,
            _ => i + 1,
        };
        out.push(RankedPrediction {
            rank,
            prediction: p,
        });
    }
    out
}

/// First-order factor `1 - d_k / log x`.
pub fn correction_factor(log_x: f64, dk: u64) -> f64 {
    1.0 - dk as f64 / log_x
}

fn sieve_bound_from(x: u64, n: usize, series: f64) -> f64 {
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    let xf = x as f64;
    2f64.powi(n as i32) * factorial * series * xf / xf.ln().powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(d: &[u64]) -> GapPattern {
        GapPattern::new(d.to_vec()).unwrap()
    }

    #[test]
    fn vanishing_tuple_predicts_zero() {
        let m = HlModel::new(10_000).unwrap();
        let p = m.predict_pi_tuple(1_000_000, &[0, 2, 4]).unwrap();
        assert!(p.zero_flag);
        assert_eq!(p.integral_form, 0.0);
        assert!(m.sieve_upper_bound(1000, &[0, 2, 4]).is_err());
    }

    #[test]
    fn correction_factor_formula() {
        let m = HlModel::new(10_000).unwrap();
        let p = m.predict_n(1_000_000, &pat(&[6])).unwrap();
        assert_eq!(p.correction_factor, 1.0 - 6.0 / (1e6f64).ln());
        assert!((p.corrected / p.main_term - p.correction_factor).abs() < 1e-15);
        assert!(p.corrected <= p.main_term);
        assert!(!p.regime_warning);
        let far = m.predict_n(1000, &pat(&[30])).unwrap();
        assert!(far.regime_warning);
    }

    #[test]
    fn sieve_bound_formula() {
        let m = HlModel::new(1_000_000).unwrap();
        let s = m.evaluator().evaluate(&[0, 2]).unwrap().value;
        let lx = (1e6f64).ln();
        let expect = 8.0 * s * 1e6 / (lx * lx);
        assert!((m.sieve_upper_bound(1_000_000, &[0, 2]).unwrap() / expect - 1.0).abs() < 1e-15);
        let single = m.sieve_upper_bound(1_000_000, &[0]).unwrap();
        assert!((single - 2e6 / lx).abs() < 1e-6);
        assert!(single >= 78_498.0);
    }

    #[test]
    fn champion_singleton_and_empty() {
        let m = HlModel::new(10_000).unwrap();
        let r = m
            .predict_champion(10_000, 1, &CandidateFamily::Explicit(vec![pat(&[2])]))
            .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rank, 1);
        assert!(m
            .predict_champion(10_000, 1, &CandidateFamily::Explicit(vec![]))
            .is_err());
        let odd = m
            .predict_champion(10_000, 1, &CandidateFamily::Explicit(vec![pat(&[3])]))
            .unwrap();
        assert!(odd.is_empty());
    }

    #[test]
    fn ties_share_rank() {
        // {0,2,6} and {0,4,6} are mirror images with equal singular series
        let m = HlModel::new(10_000).unwrap();
        let r = m
            .predict_champion(
                1_000_000,
                2,
                &CandidateFamily::Explicit(vec![pat(&[2, 6]), pat(&[4, 6]), pat(&[6, 12])]),
            )
            .unwrap();
        assert_eq!(r[0].rank, 1);
        assert_eq!(r[1].rank, 1);
        assert_eq!(r[2].rank, 3);
    }

    #[test]
    fn default_family_contents() {
        let fam = CandidateFamily::Default.candidates(1_000_000, 1).unwrap();
        // cutoff ceil(3 log 10^6) = 42; the next primorial 210 exceeds log^2 x
        assert_eq!(fam.len(), 42);
        assert!(fam.contains(&pat(&[42])));
        let fam = CandidateFamily::Default.candidates(1_000_000, 2).unwrap();
        assert!(fam.contains(&pat(&[210, 420])));
        let upto = CandidateFamily::UpTo { dmax: 20 }
            .candidates(10, 2)
            .unwrap();
        assert_eq!(upto.len(), 190);
        assert!(CandidateFamily::UpTo { dmax: 10_000 }
            .candidates(10, 3)
            .is_err());
    }
}
