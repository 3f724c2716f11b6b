//! Deterministic primality testing and prime search for 64-bit integers.

use crate::error::{Error, Result};

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

// Sufficient for every n < 3.3 * 10^24, which covers u64.
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
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

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn is_prime_miller_rabin(n: u64) -> bool {
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &w in &WITNESSES {
        if w % n == 0 {
            continue;
        }
        let mut x = pow_mod(w, d, n);
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

/// Exact primality test: trial division below 10^6, deterministic Miller–Rabin above.
pub fn is_prime(n: u64) -> bool {
    if n < TRIAL_DIVISION_LIMIT {
        is_prime_trial(n)
    } else if n.is_multiple_of(2) {
        false
    } else {
        is_prime_miller_rabin(n)
    }
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime(x: f64) -> Result<u64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::OutOfRange(x));
    }
    // Leave headroom so the candidate search cannot wrap.
    if x >= (u64::MAX - 1024) as f64 {
        return Err(Error::OutOfRange(x));
    }
    let mut c = x.floor() as u64 + 1;
    loop {
        if is_prime(c) {
            return Ok(c);
        }
        c = c.checked_add(1).ok_or(Error::OutOfRange(x))?;
    }
}
