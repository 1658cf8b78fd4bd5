//! Consecutive-prime k-tuple gap census and its Hardy–Littlewood counterpart.
//!
//! The crate is organised bottom-up:
//!
//! - [`prime_engine`]: segmented odd-only sieve, deterministic primality and
//!   small factorisation helpers.
//! - [`gap_census`]: counts of every pattern of `k + 1` consecutive primes,
//!   champion extraction, resumable scans and Bonferroni sandwich checks.
//! - [`singular_series`]: exact local factors and certified truncated Euler
//!   products, plus primorial / gcd / Δ-product / Mertens utilities.
//! - [`hl_model`]: main-term, corrected and sieve-bound predictions.
//! - [`series_average`]: ratio products, the exact local cancellation identity
//!   and brute-force singular-series averages.
//!
//! Data-parallel inner loops go through [`exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces identical results.

pub mod error;
pub mod exec;
pub mod gap_census;
pub mod hl_model;
pub mod prime_engine;
pub mod rational;
pub mod series_average;
pub mod singular_series;

pub use error::{CoreError, Result};
pub use exec::Exec;
pub use gap_census::{AnchorConvention, CensusSnapshot, ChampionRecord, GapPattern};
pub use rational::ExactRational;
pub use singular_series::SingularSeriesValue;
