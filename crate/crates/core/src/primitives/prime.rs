//! Primality testing and the moduli used for groups and hash families.

use crate::{Error, Result};

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

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
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

/// Smallest prime `p >= bound`.
pub fn smallest_prime_at_least(bound: u64) -> Result<u64> {
    let mut p = bound.max(2);
    loop {
        if is_prime(p) {
            return Ok(p);
        }
        p = p
            .checked_add(1)
            .ok_or_else(|| Error::param("bound", "no 64-bit prime at or above bound"))?;
    }
}

/// Mersenne primes `2^61-1`, `2^89-1`, `2^127-1`.
pub const MERSENNE_PRIMES: [u128; 3] = [(1 << 61) - 1, (1 << 89) - 1, (1 << 127) - 1];

/// The smallest listed Mersenne prime at or above `bound`.
pub fn hash_prime_at_least(bound: u128) -> Result<u128> {
    MERSENNE_PRIMES
        .iter()
        .copied()
        .find(|&p| p >= bound)
        .ok_or_else(|| Error::param("range", format!("no hash prime at or above {bound}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "{n}");
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(smallest_prime_at_least(128).unwrap(), 131);
        assert_eq!(smallest_prime_at_least(64).unwrap(), 67);
        assert_eq!(smallest_prime_at_least(0).unwrap(), 2);
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn hash_prime_choice() {
        assert_eq!(hash_prime_at_least(1 << 60).unwrap(), (1 << 61) - 1);
        assert_eq!(hash_prime_at_least(1 << 62).unwrap(), (1 << 89) - 1);
        assert!(hash_prime_at_least(u128::MAX).is_err());
    }
}
