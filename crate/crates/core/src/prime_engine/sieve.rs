//! Segmented, odd-only sieve of Eratosthenes.
//!
//! A segment `[lo, hi)` stores one byte per odd integer. Base primes up to
//! `sqrt(hi)` are kept once and shared read-only between workers, so a batch
//! of segments can be sieved concurrently and handed out in index order.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::arith::isqrt;
use crate::error::{CoreError, Result};
use crate::exec::Exec;

/// Integers per segment when none is given (cache-resident at one byte per odd).
pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;

/// Largest supported sieve limit; leaves headroom for segment arithmetic.
pub const MAX_LIMIT: u64 = u64::MAX - (1 << 33);

// Below this bound base primes come from a plain sieve.
const PLAIN_SIEVE_BOUND: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub segment_size: u64,
    /// Inclusive upper bound.
    pub limit: u64,
}

impl SieveConfig {
    pub fn new(limit: u64, segment_size: u64) -> Result<Self> {
        if limit < 2 {
            return Err(CoreError::Domain(format!(
                "sieve limit must be >= 2, got {limit}"
            )));
        }
        if limit > MAX_LIMIT {
            return Err(CoreError::Capacity(format!(
                "sieve limit {limit} exceeds the supported maximum {MAX_LIMIT}"
            )));
        }
        if segment_size < 2 {
            return Err(CoreError::Domain(format!(
                "segment size must be >= 2, got {segment_size}"
            )));
        }
        if segment_size > (isize::MAX as u64) {
            return Err(CoreError::Capacity(format!(
                "segment size {segment_size} does not fit in memory"
            )));
        }
        Ok(SieveConfig {
            segment_size,
            limit,
        })
    }
}

/// Primes in `[lo, hi)`, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSegment {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

/// Odd primes up to and including `bound`.
pub fn base_primes(bound: u64) -> Vec<u32> {
    assert!(
        bound <= u32::MAX as u64,
        "base prime bound {bound} exceeds u32"
    );
    if bound < 3 {
        return Vec::new();
    }
    if bound <= PLAIN_SIEVE_BOUND {
        return plain_odd_sieve(bound);
    }
    let small = base_primes(isqrt(bound));
    let mut out: Vec<u32> = Vec::new();
    let mut buf = Vec::new();
    let mut lo = 0u64;
    while lo <= bound {
        let hi = (lo + DEFAULT_SEGMENT_SIZE).min(bound + 1);
        out.extend(
            sieve_into(lo, hi, &small, &mut buf)
                .into_iter()
                .filter(|&p| p != 2)
                .map(|p| p as u32),
        );
        lo = hi;
    }
    out
}

fn plain_odd_sieve(bound: u64) -> Vec<u32> {
    // index i represents 2i + 1
    let n = (bound as usize - 1) / 2 + 1;
    let mut composite = vec![false; n];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= bound as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j < n {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    (1..n)
        .filter(|&i| !composite[i])
        .map(|i| (2 * i + 1) as u32)
        .collect()
}

/// Sieve `[lo, hi)` using odd base primes that must cover `sqrt(hi - 1)`.
fn sieve_into(lo: u64, hi: u64, base: &[u32], buf: &mut Vec<u8>) -> Vec<u64> {
    let mut primes = Vec::new();
    if lo <= 2 && 2 < hi {
        primes.push(2);
    }
    let first_odd = if lo <= 3 { 3 } else { lo | 1 };
    if first_odd >= hi {
        return primes;
    }
    let count = ((hi - first_odd).div_ceil(2)) as usize;
    buf.clear();
    buf.resize(count, 1);
    for &q in base {
        let q = q as u64;
        let qq = q * q;
        if qq >= hi {
            break;
        }
        let mut start = if qq >= first_odd {
            qq
        } else {
            match first_odd % q {
                0 => first_odd,
                r => first_odd + (q - r),
            }
        };
        if start % 2 == 0 {
            start += q;
        }
        let step = q as usize;
        let mut i = ((start - first_odd) / 2) as usize;
        while i < count {
            buf[i] = 0;
            i += step;
        }
    }
    primes.reserve(count / 8);
    primes.extend(
        buf.iter()
            .enumerate()
            .filter(|&(_, &b)| b != 0)
            .map(|(i, _)| first_odd + 2 * i as u64),
    );
    primes
}

/// Reusable sieving context whose base primes grow on demand.
#[derive(Debug, Clone)]
pub struct SegmentedSieve {
    base: Arc<Vec<u32>>,
    covered: u64,
}

impl SegmentedSieve {
    /// Prepare base primes for sieving any `[lo, hi)` with `hi <= max_hi`.
    pub fn new(max_hi: u64) -> Self {
        let covered = isqrt(max_hi.saturating_sub(1)).max(2);
        SegmentedSieve {
            base: Arc::new(base_primes(covered)),
            covered,
        }
    }

    /// Extend base primes so that ranges ending at `hi` can be sieved.
    pub fn ensure(&mut self, hi: u64) {
        let need = isqrt(hi.saturating_sub(1));
        if need > self.covered {
            // grow geometrically so repeated extension stays cheap
            let target = need
                .max(self.covered.saturating_mul(2))
                .min(u32::MAX as u64);
            self.base = Arc::new(base_primes(target));
            self.covered = target;
        }
    }

    /// Largest `hi` this sieve can currently handle.
    pub fn max_hi(&self) -> u64 {
        let c = self.covered as u128;
        ((c + 1) * (c + 1)).min(u64::MAX as u128) as u64
    }

    pub fn segment(&self, lo: u64, hi: u64) -> PrimeSegment {
        assert!(lo < hi, "empty segment [{lo}, {hi})");
        assert!(
            hi <= self.max_hi(),
            "segment end {hi} beyond base prime coverage"
        );
        let mut buf = Vec::new();
        PrimeSegment {
            lo,
            hi,
            primes: sieve_into(lo, hi, &self.base, &mut buf),
        }
    }

    /// Sieve several ranges, concurrently when `exec` allows, returned in
    /// input order.
    pub fn segments(&self, ranges: &[(u64, u64)], exec: Exec) -> Vec<PrimeSegment> {
        exec.map(ranges, |&(lo, hi)| self.segment(lo, hi))
    }
}

/// Ordered stream of [`PrimeSegment`]s covering `[0, limit]`.
///
/// Segments are produced in batches (one per worker, sieved concurrently)
/// and yielded strictly in index order.
#[derive(Debug)]
pub struct PrimeSegments {
    sieve: SegmentedSieve,
    next_lo: u64,
    end: u64,
    segment_size: u64,
    exec: Exec,
    ready: VecDeque<PrimeSegment>,
}

impl Iterator for PrimeSegments {
    type Item = PrimeSegment;

    fn next(&mut self) -> Option<PrimeSegment> {
        if self.ready.is_empty() && self.next_lo < self.end {
            let batch = self.exec.workers() * 2;
            let mut ranges = Vec::with_capacity(batch);
            while ranges.len() < batch && self.next_lo < self.end {
                let hi = self.next_lo.saturating_add(self.segment_size).min(self.end);
                ranges.push((self.next_lo, hi));
                self.next_lo = hi;
            }
            self.ready.extend(self.sieve.segments(&ranges, self.exec));
        }
        self.ready.pop_front()
    }
}

/// Stream the primes `<= limit` as consecutive segments of `segment_size`
/// integers.
pub fn primes_up_to(limit: u64, segment_size: u64) -> Result<PrimeSegments> {
    primes_up_to_with(SieveConfig::new(limit, segment_size)?, Exec::default())
}

pub fn primes_up_to_with(cfg: SieveConfig, exec: Exec) -> Result<PrimeSegments> {
    let cfg = SieveConfig::new(cfg.limit, cfg.segment_size)?;
    let end = cfg.limit + 1;
    Ok(PrimeSegments {
        sieve: SegmentedSieve::new(end),
        next_lo: 0,
        end,
        segment_size: cfg.segment_size,
        exec,
        ready: VecDeque::new(),
    })
}

/// All primes `<= limit` collected into one vector.
pub fn primes_vec(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    match primes_up_to(limit, DEFAULT_SEGMENT_SIZE) {
        Ok(segs) => segs.flat_map(|s| s.primes).collect(),
        Err(e) => panic!("primes_vec({limit}): {e}"),
    }
}

/// Write one segment's primes as newline-delimited decimal text.
pub fn write_segment_dump<W: Write>(segment: &PrimeSegment, mut w: W) -> std::io::Result<()> {
    for p in &segment.primes {
        writeln!(w, "{p}")?;
    }
    Ok(())
}

/// Dense primality lookup table for `0..=limit`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    flags: Vec<bool>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        let len = usize::try_from(limit)
            .ok()
            .and_then(|l| l.checked_add(1))
            .ok_or_else(|| CoreError::Capacity(format!("prime table up to {limit}")))?;
        let mut flags = vec![false; len];
        if limit >= 2 {
            for p in primes_vec(limit) {
                flags[p as usize] = true;
            }
        }
        Ok(PrimeTable { flags })
    }

    pub fn limit(&self) -> u64 {
        self.flags.len() as u64 - 1
    }

    /// Panics if `n` exceeds the table.
    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        self.flags[n as usize]
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f)
            .map(|(n, _)| n as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(limit: u64, seg: u64, exec: Exec) -> Vec<u64> {
        let cfg = SieveConfig::new(limit, seg).unwrap();
        primes_up_to_with(cfg, exec)
            .unwrap()
            .flat_map(|s| s.primes)
            .collect()
    }

    #[test]
    fn small_limits() {
        assert_eq!(collect(10, 4, Exec::Sequential), vec![2, 3, 5, 7]);
        assert_eq!(collect(2, 2, Exec::Sequential), vec![2]);
        assert_eq!(collect(3, 2, Exec::Sequential), vec![2, 3]);
        assert_eq!(collect(11, 3, Exec::Parallel), vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(SieveConfig::new(1, 10), Err(CoreError::Domain(_))));
        assert!(matches!(
            SieveConfig::new(100, 1),
            Err(CoreError::Domain(_))
        ));
        assert!(matches!(
            SieveConfig::new(u64::MAX, 1 << 20),
            Err(CoreError::Capacity(_))
        ));
    }

    #[test]
    fn segments_tile_the_range() {
        let segs: Vec<_> = primes_up_to(1000, 64).unwrap().collect();
        assert_eq!(segs[0].lo, 0);
        assert_eq!(segs.last().unwrap().hi, 1001);
        for w in segs.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
        for s in &segs {
            assert!(s.primes.iter().all(|&p| p >= s.lo && p < s.hi));
        }
    }

    #[test]
    fn base_primes_beyond_plain_bound() {
        let big = base_primes(PLAIN_SIEVE_BOUND + 5000);
        let plain = plain_odd_sieve(PLAIN_SIEVE_BOUND + 5000);
        assert_eq!(big, plain);
    }

    #[test]
    fn sieve_extends_on_demand() {
        let mut s = SegmentedSieve::new(100);
        s.ensure(1_000_000_000_100);
        let seg = s.segment(1_000_000_000_000, 1_000_000_000_100);
        let expect: Vec<u64> = (1_000_000_000_000..1_000_000_000_100)
            .filter(|&n| crate::prime_engine::is_prime(n))
            .collect();
        assert_eq!(seg.primes, expect);
        assert_eq!(seg.primes[0], 1_000_000_000_039);
    }

    #[test]
    fn dump_format() {
        let seg = SegmentedSieve::new(30).segment(10, 30);
        let mut out = Vec::new();
        write_segment_dump(&seg, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "11\n13\n17\n19\n23\n29\n");
    }

    #[test]
    fn prime_table_lookup() {
        let t = PrimeTable::new(100).unwrap();
        assert_eq!(t.primes().count(), 25);
        assert!(t.is_prime(97) && !t.is_prime(91));
    }
}
