//! Big-integer and generic combinatorial helpers.

use num::bigint::BigInt;
use num::traits::{One, Zero};

use crate::scalar::Scalar;

/// Binomial coefficient `C(n, k)` as a big integer, multiplicative formula.
/// Every prefix product is divisible by the running denominator, so each
/// division is exact.
pub fn binomial_bigint(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `C(n, k)` in any scalar mode.
pub fn binomial<T: Scalar>(n: u64, k: u64) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_u64(n - i) / T::from_u64(i + 1);
    }
    acc
}

/// Falling factorial `n (n-1) ... (n-k+1)`; `1` for `k = 0`.
pub fn falling_factorial<T: Scalar>(n: u64, k: u64) -> T {
    if k > n {
        return T::zero();
    }
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_u64(n - i);
    }
    acc
}

/// `k!` in any scalar mode.
pub fn factorial<T: Scalar>(k: u64) -> T {
    let mut acc = T::one();
    for i in 2..=k {
        acc = acc * T::from_u64(i);
    }
    acc
}
