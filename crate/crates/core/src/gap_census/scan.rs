//! Streaming census over the ordered prime stream.
//!
//! Segments are sieved in batches. Each batch is concatenated with the last
//! `k` primes of the previous one (the open window), so every run of `k + 1`
//! consecutive primes is completed exactly once, in increasing order of both
//! its smallest and largest element. Runs are split at checkpoint boundaries
//! and counted in parallel chunks; chunk maps are merged by addition, so the
//! result does not depend on how the work was divided.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{AnchorConvention, CensusSnapshot, GapPattern};
use crate::error::{domain, CoreError, Result};
use crate::exec::{split_ranges, Exec};
use crate::prime_engine::{PrimeSegment, SegmentedSieve, DEFAULT_SEGMENT_SIZE, MAX_LIMIT};

/// Longest supported run: `k + 1 = 9` primes.
pub const MAX_K: usize = 8;

const GAP_BITS: u32 = 16;
const STATE_VERSION: u32 = 1;
// below this many runs a range is counted on the calling thread
const PARALLEL_MIN_RUNS: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub k: usize,
    pub convention: AnchorConvention,
    pub checkpoints: Vec<u64>,
    pub segment_size: u64,
    pub exec: Exec,
}

impl CensusConfig {
    pub fn new(checkpoints: Vec<u64>, k: usize, convention: AnchorConvention) -> Result<Self> {
        let cfg = CensusConfig {
            k,
            convention,
            checkpoints,
            segment_size: DEFAULT_SEGMENT_SIZE,
            exec: Exec::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_segment_size(mut self, segment_size: u64) -> Result<Self> {
        self.segment_size = segment_size;
        self.validate()?;
        Ok(self)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > MAX_K {
            return domain(format!("k must be in 1..={MAX_K}, got {}", self.k));
        }
        if self.checkpoints.is_empty() {
            return domain("at least one checkpoint is required");
        }
        if self.checkpoints[0] < 2 {
            return domain(format!(
                "checkpoints must be >= 2, got {}",
                self.checkpoints[0]
            ));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return domain("checkpoints must be strictly increasing");
        }
        let last = *self.checkpoints.last().expect("nonempty");
        if last > MAX_LIMIT - 1_000_000 {
            return Err(CoreError::Capacity(format!(
                "checkpoint {last} exceeds the supported sieve range"
            )));
        }
        if self.segment_size < 2 {
            return domain(format!(
                "segment size must be >= 2, got {}",
                self.segment_size
            ));
        }
        Ok(())
    }
}

/// Receiver for checkpoint snapshots (and, optionally, raw segments).
pub trait CensusSink {
    fn on_snapshot(&mut self, snapshot: CensusSnapshot) -> Result<()>;

    fn on_segment(&mut self, _segment: &PrimeSegment) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(CensusSnapshot) -> Result<()>> CensusSink for F {
    fn on_snapshot(&mut self, snapshot: CensusSnapshot) -> Result<()> {
        self(snapshot)
    }
}

/// Serializable scan position: everything needed to resume a census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusState {
    pub version: u32,
    pub config: CensusConfig,
    /// First integer not yet sieved.
    pub next_lo: u64,
    pub last_prime: Option<u64>,
    /// The last `min(k, primes seen)` primes.
    pub open_window: Vec<u64>,
    /// Number of checkpoints already reported.
    pub emitted: usize,
    pub counts: Vec<(GapPattern, u64)>,
}

#[derive(Debug)]
pub struct CensusScanner {
    cfg: CensusConfig,
    sieve: SegmentedSieve,
    next_lo: u64,
    tail: Vec<u64>,
    counts: FxHashMap<u128, u64>,
    emitted: usize,
}

impl CensusScanner {
    pub fn new(cfg: CensusConfig) -> Result<Self> {
        cfg.validate()?;
        let last = *cfg.checkpoints.last().expect("validated");
        Ok(CensusScanner {
            sieve: SegmentedSieve::new(last.saturating_add(cfg.segment_size)),
            cfg,
            next_lo: 0,
            tail: Vec::new(),
            counts: FxHashMap::default(),
            emitted: 0,
        })
    }

    pub fn from_state(state: CensusState) -> Result<Self> {
        if state.version != STATE_VERSION {
            return Err(CoreError::State(format!(
                "unsupported census state version {}",
                state.version
            )));
        }
        let mut scanner = CensusScanner::new(state.config)?;
        let k = scanner.cfg.k;
        if state.open_window.len() > k
            || state.open_window.windows(2).any(|w| w[0] >= w[1])
            || state.open_window.last().copied() != state.last_prime
            || state.last_prime.is_some_and(|p| p >= state.next_lo)
            || state.emitted > scanner.cfg.checkpoints.len()
        {
            return Err(CoreError::State("inconsistent open window".into()));
        }
        for (pattern, count) in state.counts {
            if pattern.k() != k {
                return Err(CoreError::State(format!(
                    "pattern {pattern} has wrong length"
                )));
            }
            scanner.counts.insert(encode_pattern(&pattern), count);
        }
        scanner.next_lo = state.next_lo;
        scanner.tail = state.open_window;
        scanner.emitted = state.emitted;
        Ok(scanner)
    }

    pub fn state(&self) -> CensusState {
        let mut counts: Vec<(GapPattern, u64)> = self
            .counts
            .iter()
            .map(|(&key, &c)| (decode_pattern(key, self.cfg.k), c))
            .collect();
        counts.sort();
        CensusState {
            version: STATE_VERSION,
            config: self.cfg.clone(),
            next_lo: self.next_lo,
            last_prime: self.tail.last().copied(),
            open_window: self.tail.clone(),
            emitted: self.emitted,
            counts,
        }
    }

    pub fn config(&self) -> &CensusConfig {
        &self.cfg
    }

    pub fn is_finished(&self) -> bool {
        self.emitted == self.cfg.checkpoints.len()
    }

    /// First integer not yet sieved.
    pub fn position(&self) -> u64 {
        self.next_lo
    }

    /// Process batches until everything below `until` has been sieved or
    /// the census is complete.
    pub fn advance(&mut self, until: u64, sink: &mut dyn CensusSink) -> Result<()> {
        self.flush_complete(sink)?;
        while !self.is_finished() && self.next_lo < until {
            self.step(until, sink)?;
        }
        Ok(())
    }

    pub fn run(mut self, sink: &mut dyn CensusSink) -> Result<()> {
        self.advance(u64::MAX, sink)
    }

    fn scan_end(&self) -> u64 {
        match self.cfg.convention {
            AnchorConvention::LargestLeX => self.cfg.checkpoints.last().expect("nonempty") + 1,
            // runs anchored at x may end past it; keep going until they close
            AnchorConvention::SmallestLeX => MAX_LIMIT + 1,
        }
    }

    fn step(&mut self, until: u64, sink: &mut dyn CensusSink) -> Result<()> {
        let end = self.scan_end().min(until.max(self.next_lo + 1));
        let batch = self.cfg.exec.workers() * 2;
        let mut ranges = Vec::with_capacity(batch);
        let mut lo = self.next_lo;
        while ranges.len() < batch && lo < end {
            let hi = lo.saturating_add(self.cfg.segment_size).min(end);
            ranges.push((lo, hi));
            lo = hi;
        }
        self.sieve.ensure(lo);
        let segments = self.sieve.segments(&ranges, self.cfg.exec);

        let k = self.cfg.k;
        let fresh: usize = segments.iter().map(|s| s.primes.len()).sum();
        let mut buf = Vec::with_capacity(self.tail.len() + fresh);
        buf.extend_from_slice(&self.tail);
        for seg in &segments {
            sink.on_segment(seg)?;
            buf.extend_from_slice(&seg.primes);
        }

        self.absorb_runs(&buf, self.tail.len().max(k), sink)?;

        let keep = buf.len().min(k);
        self.tail = buf[buf.len() - keep..].to_vec();
        self.next_lo = lo;
        self.flush_complete(sink)
    }

    fn anchor(&self, buf: &[u64], end_idx: usize) -> u64 {
        match self.cfg.convention {
            AnchorConvention::LargestLeX => buf[end_idx],
            AnchorConvention::SmallestLeX => buf[end_idx - self.cfg.k],
        }
    }

    /// Count runs ending at indices `first_end..buf.len()`.
    fn absorb_runs(
        &mut self,
        buf: &[u64],
        first_end: usize,
        sink: &mut dyn CensusSink,
    ) -> Result<()> {
        let end = buf.len();
        let mut s = first_end;
        while s < end && !self.is_finished() {
            let c = self.cfg.checkpoints[self.emitted];
            if self.anchor(buf, s) > c {
                self.emit(sink)?;
                continue;
            }
            // anchors are increasing in the run's end index
            let (mut lo, mut hi) = (s, end);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if self.anchor(buf, mid) <= c {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let stop = lo;
            self.count_runs(buf, s, stop);
            s = stop;
        }
        Ok(())
    }

    fn count_runs(&mut self, buf: &[u64], start: usize, stop: usize) {
        let k = self.cfg.k;
        let n = stop - start;
        if n < PARALLEL_MIN_RUNS || !self.cfg.exec.is_parallel() {
            count_into(&mut self.counts, buf, k, start..stop);
            return;
        }
        let ranges = split_ranges(n, self.cfg.exec.workers() * 4);
        let partials = self.cfg.exec.map(&ranges, |r| {
            let mut local = FxHashMap::default();
            count_into(&mut local, buf, k, start + r.start..start + r.end);
            local
        });
        for local in partials {
            for (key, c) in local {
                *self.counts.entry(key).or_insert(0) += c;
            }
        }
    }

    fn flush_complete(&mut self, sink: &mut dyn CensusSink) -> Result<()> {
        while !self.is_finished() {
            let c = self.cfg.checkpoints[self.emitted];
            let complete = match self.cfg.convention {
                AnchorConvention::LargestLeX => self.next_lo > c,
                AnchorConvention::SmallestLeX => self.tail.len() == self.cfg.k && self.tail[0] > c,
            };
            if !complete {
                break;
            }
            self.emit(sink)?;
        }
        Ok(())
    }

    fn emit(&mut self, sink: &mut dyn CensusSink) -> Result<()> {
        let k = self.cfg.k;
        let counts: BTreeMap<GapPattern, u64> = self
            .counts
            .iter()
            .map(|(&key, &c)| (decode_pattern(key, k), c))
            .collect();
        let snapshot = CensusSnapshot {
            x: self.cfg.checkpoints[self.emitted],
            k,
            anchor_convention: self.cfg.convention,
            counts,
        };
        self.emitted += 1;
        sink.on_snapshot(snapshot)
    }
}

fn count_into(map: &mut FxHashMap<u128, u64>, buf: &[u64], k: usize, ends: std::ops::Range<usize>) {
    for e in ends {
        let mut key = 0u128;
        for j in 0..k {
            let gap = buf[e - k + j + 1] - buf[e - k + j];
            // prime gaps below 2^64 are far below 2^16
            debug_assert!(gap < 1 << GAP_BITS);
            key |= (gap as u128) << (GAP_BITS * j as u32);
        }
        *map.entry(key).or_insert(0) += 1;
    }
}

fn encode_pattern(p: &GapPattern) -> u128 {
    let mut prev = 0;
    let mut key = 0u128;
    for (j, &d) in p.diffs().iter().enumerate() {
        key |= ((d - prev) as u128) << (GAP_BITS * j as u32);
        prev = d;
    }
    key
}

fn decode_pattern(key: u128, k: usize) -> GapPattern {
    let mask = (1u128 << GAP_BITS) - 1;
    let gaps: Vec<u64> = (0..k)
        .map(|j| ((key >> (GAP_BITS * j as u32)) & mask) as u64)
        .collect();
    GapPattern::from_gaps(&gaps).expect("census keys hold positive gaps")
}

/// Census at every checkpoint with default segment size and execution mode.
pub fn run_census(
    checkpoints: &[u64],
    k: usize,
    convention: AnchorConvention,
) -> Result<Vec<CensusSnapshot>> {
    run_census_with(CensusConfig::new(checkpoints.to_vec(), k, convention)?)
}

pub fn run_census_with(cfg: CensusConfig) -> Result<Vec<CensusSnapshot>> {
    let mut out = Vec::with_capacity(cfg.checkpoints.len());
    let mut sink = |s: CensusSnapshot| -> Result<()> {
        out.push(s);
        Ok(())
    };
    CensusScanner::new(cfg)?.run(&mut sink)?;
    Ok(out)
}
