//! Checked integer helpers shared by the formula modules.

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::Overflow("binomial"))?
            / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial"))
}

pub fn checked_mul(a: u64, b: u64, what: &'static str) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow(what))
}

/// Division that must be exact; a remainder is reported as an integrity error.
pub fn exact_div(numerator: u64, denominator: u64, what: &'static str) -> Result<u64> {
    if denominator == 0 || !numerator.is_multiple_of(denominator) {
        return Err(Error::Integrity {
            what,
            numerator,
            denominator,
        });
    }
    Ok(numerator / denominator)
}
