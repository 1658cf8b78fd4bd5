//! Counts of gap patterns among runs of `k + 1` consecutive primes.
//!
//! A run `p_n < p_{n+1} < ... < p_{n+k}` matches the pattern `d_1 < ... < d_k`
//! when `p_{n+i} - p_n = d_i`. Each run is attributed to a checkpoint `x`
//! through its anchor element, which is either the largest prime of the run
//! ([`AnchorConvention::LargestLeX`], the usual jumping-champion count) or
//! the smallest ([`AnchorConvention::SmallestLeX`], matching tuple counts
//! over `m <= x`).

mod persist;
mod scan;
mod tuples;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{domain, CoreError, Result};

pub use persist::{
    read_snapshot_csv, write_champions_csv, write_snapshot_csv, write_snapshot_json, TableMeta,
};
pub use scan::{
    run_census, run_census_with, CensusConfig, CensusScanner, CensusSink, CensusState, MAX_K,
};
pub use tuples::{
    bonferroni_check, bonferroni_check_with, pi_tuple_empirical, pi_tuple_with, BonferroniReport,
    BONFERRONI_BUDGET,
};

/// Strictly increasing positive differences `d_1 < ... < d_k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GapPattern(Vec<u64>);

impl GapPattern {
    pub fn new(diffs: Vec<u64>) -> Result<Self> {
        if diffs.is_empty() {
            return domain("a gap pattern needs at least one difference");
        }
        if diffs[0] == 0 {
            return domain("gap pattern differences must be positive");
        }
        if diffs.windows(2).any(|w| w[0] >= w[1]) {
            return domain(format!("gap pattern {diffs:?} is not strictly increasing"));
        }
        Ok(GapPattern(diffs))
    }

    /// Pattern from consecutive gaps `g_1, ..., g_k` (partial sums become `d_i`).
    pub fn from_gaps(gaps: &[u64]) -> Result<Self> {
        let mut acc = 0u64;
        let diffs = gaps
            .iter()
            .map(|&g| {
                acc += g;
                acc
            })
            .collect();
        GapPattern::new(diffs)
    }

    pub fn diffs(&self) -> &[u64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// `d_k`, the span of the run.
    pub fn largest(&self) -> u64 {
        *self.0.last().expect("nonempty")
    }

    pub fn gcd(&self) -> u64 {
        self.0.iter().fold(0, |g, &d| g.gcd(&d))
    }

    /// `{0} ∪ D` as an offset list.
    pub fn with_zero(&self) -> Vec<u64> {
        std::iter::once(0).chain(self.0.iter().copied()).collect()
    }
}

impl TryFrom<String> for GapPattern {
    type Error = CoreError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GapPattern> for String {
    fn from(p: GapPattern) -> String {
        p.to_string()
    }
}

impl fmt::Display for GapPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GapPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for GapPattern {
    type Err = CoreError;

    /// Accepts `2-6` as well as `2,6`.
    fn from_str(s: &str) -> Result<Self> {
        let diffs = s
            .split(['-', ','])
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CoreError::Domain(format!("bad pattern element {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GapPattern::new(diffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorConvention {
    /// A run counts toward `x` when its largest prime is `<= x`.
    LargestLeX,
    /// A run counts toward `x` when its smallest prime is `<= x`.
    SmallestLeX,
}

impl fmt::Display for AnchorConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorConvention::LargestLeX => "largest_le_x",
            AnchorConvention::SmallestLeX => "smallest_le_x",
        })
    }
}

impl FromStr for AnchorConvention {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "largest_le_x" | "largest" => Ok(AnchorConvention::LargestLeX),
            "smallest_le_x" | "smallest" => Ok(AnchorConvention::SmallestLeX),
            other => domain(format!("unknown anchor convention {other:?}")),
        }
    }
}

/// Pattern counts `N_k(x, D)` at one checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSnapshot {
    pub x: u64,
    pub k: usize,
    pub anchor_convention: AnchorConvention,
    pub counts: BTreeMap<GapPattern, u64>,
}

impl CensusSnapshot {
    pub fn count(&self, pattern: &GapPattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    /// Number of runs attributed to this checkpoint.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// The argmax set of a snapshot, ties preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChampionRecord {
    pub x: u64,
    pub k: usize,
    pub champions: Vec<GapPattern>,
    pub max_count: u64,
    pub gcds: BTreeMap<GapPattern, u64>,
}

pub fn champions_of(snapshot: &CensusSnapshot) -> Result<ChampionRecord> {
    let Some(&max_count) = snapshot.counts.values().max() else {
        return domain(format!("snapshot at x = {} is empty", snapshot.x));
    };
    let champions: Vec<GapPattern> = snapshot
        .counts
        .iter()
        .filter(|&(_, &c)| c == max_count)
        .map(|(p, _)| p.clone())
        .collect();
    let gcds = champions.iter().map(|p| (p.clone(), p.gcd())).collect();
    Ok(ChampionRecord {
        x: snapshot.x,
        k: snapshot.k,
        champions,
        max_count,
        gcds,
    })
}
