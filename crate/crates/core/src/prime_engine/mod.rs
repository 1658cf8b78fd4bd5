//! Ordered prime generation and the small-integer arithmetic built on it.

mod arith;
mod sieve;

pub use arith::{factorize, is_prime, is_squarefree, isqrt, omega_with_multiplicity};
pub use sieve::{
    base_primes, primes_up_to, primes_up_to_with, primes_vec, write_segment_dump, PrimeSegment,
    PrimeSegments, PrimeTable, SegmentedSieve, SieveConfig, DEFAULT_SEGMENT_SIZE, MAX_LIMIT,
};
