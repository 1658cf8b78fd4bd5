use crate::error::{domain, Result};

/// Floor of the square root, exact for every `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// Witness set proven sufficient for every n < 3.3 * 10^24.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for the whole `u64` range (Miller–Rabin with a
/// fixed witness set, not a probabilistic test).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorisation by trial division, as `(prime, exponent)` pairs in
/// increasing order. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return domain("cannot factor 0");
    }
    let mut out = Vec::new();
    let mut push = |n: &mut u64, p: u64| {
        let mut e = 0;
        while *n % p == 0 {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(&mut n, 2);
    push(&mut n, 3);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(&mut n, p);
        push(&mut n, p + 2);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(out)
}

/// Number of prime factors of `n` counted with multiplicity, so `12 -> 3`.
pub fn omega_with_multiplicity(n: u64) -> Result<u32> {
    Ok(factorize(n)?.iter().map(|&(_, e)| e).sum())
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.iter().all(|&(_, e)| e == 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_with_multiplicity(1).unwrap(), 0);
        assert_eq!(omega_with_multiplicity(12).unwrap(), 3);
        assert_eq!(omega_with_multiplicity(2310).unwrap(), 5);
        assert_eq!(omega_with_multiplicity(1 << 40).unwrap(), 40);
        assert!(omega_with_multiplicity(0).is_err());
    }

    #[test]
    fn is_prime_examples() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(97));
        assert!(trial_division(1_000_000_007));
        assert!(is_prime(1_000_000_007));
        // strong pseudoprime to bases 2..=11
        assert!(!is_prime(2_152_302_898_747));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn is_prime_matches_trial_division_exhaustively() {
        for n in 0..=100_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, u32::MAX as u64, u64::MAX] {
            let r = isqrt(n) as u128;
            assert!(r * r <= n as u128 && (r + 1) * (r + 1) > n as u128);
        }
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(30).unwrap());
        assert!(!is_squarefree(12).unwrap());
        assert!(is_squarefree(1).unwrap());
    }
}
