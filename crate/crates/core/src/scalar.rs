//! Numeric-mode abstraction.
//!
//! Every probability formula in this crate is written once, generically over
//! [`Scalar`]. Two families implement it:
//!
//! - arbitrary-precision rationals ([`crate::Exact`]), where every identity
//!   in the test suite is a machine-checkable equality, and
//! - IEEE floats (`f64`, `f32`), where the binomial building block is
//!   evaluated in log space so that huge binomial coefficients paired with
//!   tiny powers never overflow.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{One, ToPrimitive, Zero};
use num::BigRational;

use crate::combinatorics::binomial_bigint;
use crate::error::{Error, Result};

/// Which arithmetic a scalar type performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    Exact,
    Float,
}

impl NumericMode {
    pub fn name(self) -> &'static str {
        match self {
            NumericMode::Exact => "exact",
            NumericMode::Float => "float",
        }
    }
}

/// Scalar type usable as a probability weight.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: NumericMode;

    fn from_u64(n: u64) -> Self;

    fn from_i64(n: i64) -> Self;

    /// `num / den` with `den > 0`.
    fn from_ratio(num: u64, den: u64) -> Self;

    /// `self^e` for a non-negative integer exponent (`x^0 = 1`, including `0^0`).
    fn powu(&self, e: u64) -> Self;

    /// `C(n, k) * beta^eb * (1 - beta)^ec`, the building block of every
    /// lattice PMF formula. Zero when `k > n`. Float implementations combine
    /// the factors in log space.
    fn binom_weight(n: u64, k: u64, beta: &Self, eb: u64, ec: u64) -> Self;

    /// `1 - x^e`, evaluated without cancellation in float mode.
    fn one_minus_powu(x: &Self, e: u64) -> Self;

    /// Parse a probability literal: either `p/q` or a plain decimal.
    /// In exact mode decimals are read digit-by-digit (`0.001` is `1/1000`).
    fn from_prob_literal(s: &str) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Render for machine-readable output: `p/q` in exact mode,
    /// 15 significant digits in float mode.
    fn render(&self) -> String;
}

fn literal_err(s: &str) -> Error {
    Error::InvalidParameter(format!("cannot parse probability literal `{s}`"))
}

// ---------------------------------------------------------------------------
// Exact rationals
// ---------------------------------------------------------------------------

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_u64(n: u64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn from_i64(n: i64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn powu(&self, e: u64) -> Self {
        num::pow::pow(self.clone(), e as usize)
    }

    fn binom_weight(n: u64, k: u64, beta: &Self, eb: u64, ec: u64) -> Self {
        if k > n {
            return Self::zero();
        }
        let c = Ratio::from_integer(binomial_bigint(n, k));
        c * beta.powu(eb) * (Self::one() - beta).powu(ec)
    }

    fn one_minus_powu(x: &Self, e: u64) -> Self {
        Self::one() - x.powu(e)
    }

    fn from_prob_literal(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num: BigInt = p.trim().parse().map_err(|_| literal_err(s))?;
            let den: BigInt = q.trim().parse().map_err(|_| literal_err(s))?;
            if num.sign() == num::bigint::Sign::Minus || den <= BigInt::zero() {
                return Err(literal_err(s));
            }
            return Ok(Ratio::new(num, den));
        }
        // Decimal literal: int part plus optional fractional digits.
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(literal_err(s));
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| literal_err(s))?
        };
        let den = num::pow::pow(BigInt::from(10), frac_part.len());
        Ok(Ratio::new(num, den))
    }

    fn to_f64(&self) -> f64 {
        if let Some(v) = ToPrimitive::to_f64(self) {
            if v.is_finite() {
                return v;
            }
        }
        // Oversized numerator or denominator: strip a common power of two
        // first, then divide.
        let bits = self.numer().bits().max(self.denom().bits());
        if bits <= 64 {
            return f64::NAN;
        }
        let shift = bits - 64;
        let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

// ---------------------------------------------------------------------------
// Floats
// ---------------------------------------------------------------------------

/// `ln(n!)`; exact summation below 21, Stirling series above.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 20 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let x2 = x * x;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2)
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    // For small k, summing k logarithms keeps the absolute error of the
    // result near machine epsilon; the Stirling difference below carries
    // the rounding of terms of size ln(n!) ~ n ln n instead, which is far
    // too coarse when the final exponent is small.
    if k <= 64 {
        return (0..k)
            .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
            .sum();
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn binom_weight_f64(n: u64, k: u64, beta: f64, eb: u64, ec: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if beta == 0.0 {
        return if eb > 0 { 0.0 } else { ln_binomial(n, k).exp() };
    }
    if beta == 1.0 {
        return if ec > 0 { 0.0 } else { ln_binomial(n, k).exp() };
    }
    (ln_binomial(n, k) + eb as f64 * beta.ln() + ec as f64 * (-beta).ln_1p()).exp()
}

fn parse_prob_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some((p, q)) = s.split_once('/') {
        let num: f64 = p.trim().parse().map_err(|_| literal_err(s))?;
        let den: f64 = q.trim().parse().map_err(|_| literal_err(s))?;
        num / den
    } else {
        s.parse().map_err(|_| literal_err(s))?
    };
    if !v.is_finite() {
        return Err(literal_err(s));
    }
    Ok(v)
}

macro_rules! impl_scalar_float {
    ($t:ty) => {
        impl Scalar for $t {
            const MODE: NumericMode = NumericMode::Float;

            fn from_u64(n: u64) -> Self {
                n as $t
            }

            fn from_i64(n: i64) -> Self {
                n as $t
            }

            fn from_ratio(num: u64, den: u64) -> Self {
                assert!(den > 0, "denominator must be positive");
                num as $t / den as $t
            }

            fn powu(&self, e: u64) -> Self {
                ((*self as f64).powi(e.min(i32::MAX as u64) as i32)) as $t
            }

            fn binom_weight(n: u64, k: u64, beta: &Self, eb: u64, ec: u64) -> Self {
                binom_weight_f64(n, k, *beta as f64, eb, ec) as $t
            }

            fn one_minus_powu(x: &Self, e: u64) -> Self {
                let x = *x as f64;
                if e == 0 {
                    return 0.0 as $t;
                }
                if x <= 0.0 {
                    return (1.0 - x.powi(e.min(i32::MAX as u64) as i32)) as $t;
                }
                (-(e as f64 * x.ln()).exp_m1()) as $t
            }

            fn from_prob_literal(s: &str) -> Result<Self> {
                parse_prob_f64(s).map(|v| v as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn render(&self) -> String {
                format!("{:.14e}", *self as f64)
            }
        }
    };
}

impl_scalar_float!(f64);
impl_scalar_float!(f32);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn br(n: i64, d: i64) -> Exact {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_literals() {
        assert_eq!(Exact::from_prob_literal("1/3").unwrap(), br(1, 3));
        assert_eq!(Exact::from_prob_literal("0.001").unwrap(), br(1, 1000));
        assert_eq!(Exact::from_prob_literal("0.25").unwrap(), br(1, 4));
        assert_eq!(Exact::from_prob_literal("1").unwrap(), br(1, 1));
        assert_eq!(
            Exact::from_prob_literal("0.000693147").unwrap(),
            br(693_147, 1_000_000_000)
        );
        assert!(Exact::from_prob_literal("x").is_err());
        assert!(Exact::from_prob_literal("-1/2").is_err());
        assert!(Exact::from_prob_literal("1/0").is_err());
    }

    #[test]
    fn float_literals() {
        assert_eq!(f64::from_prob_literal("1/4").unwrap(), 0.25);
        assert_eq!(f64::from_prob_literal("0.001").unwrap(), 0.001);
        assert!(f64::from_prob_literal("").is_err());
    }

    #[test]
    fn ln_factorial_agrees_with_exact() {
        let mut exact = 1f64;
        for n in 1..=30u64 {
            exact *= n as f64;
            let rel = (ln_factorial(n) - exact.ln()).abs() / exact.ln().max(1.0);
            assert!(rel < 1e-13, "n={n} rel={rel}");
        }
    }

    #[test]
    fn binom_weight_matches_exact_small() {
        let beta = br(1, 3);
        for n in 0..=12u64 {
            for k in 0..=n {
                let e = Exact::binom_weight(n, k, &beta, k, n - k);
                let f = f64::binom_weight(n, k, &(1.0 / 3.0), k, n - k);
                assert!((Scalar::to_f64(&e) - f).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn binom_weight_large_n_no_overflow() {
        // C(100000, 7) * 1e-35 * (1-1e-5)^~1e5 stays finite and positive.
        let v = f64::binom_weight(100_000, 7, &1e-5, 7, 99_993);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn one_minus_powu_stable() {
        // x = 1 - 2^-40 is exactly representable; 1 - x^10 expands to
        // d (10 - 45 d + 120 d^2 - ...) with d = 2^-40.
        let d = (-40f64).exp2();
        let x = 1.0 - d;
        let expect = d * (10.0 - 45.0 * d + 120.0 * d * d);
        let v = f64::one_minus_powu(&x, 10);
        assert!((v - expect).abs() / expect < 1e-9, "{v} vs {expect}");
        assert_eq!(Exact::one_minus_powu(&br(1, 2), 3), br(7, 8));
        assert_eq!(f64::one_minus_powu(&0.5, 0), 0.0);
        assert_eq!(f64::one_minus_powu(&0.0, 4), 1.0);
    }

    #[test]
    fn render_formats() {
        assert_eq!(br(1, 3).render(), "1/3");
        assert_eq!(br(2, 1).render(), "2");
        assert_eq!(0.5f64.render(), "5.00000000000000e-1");
    }

    #[test]
    fn f32_mode_works_coarsely() {
        let params = crate::LatticeParams::new(30u64, 4, 0.1f32).unwrap();
        let pmf = crate::full_pmf(&params, crate::Method::Direct).unwrap();
        let reference = crate::LatticeParams::new(30u64, 4, 0.1f64).unwrap();
        for r in 0..=params.support_max() {
            let coarse = pmf.prob(r) as f64;
            let fine = crate::pmf_direct(&reference, r);
            assert!((coarse - fine).abs() < 1e-5, "r={r}: {coarse} vs {fine}");
        }
        assert!((Scalar::to_f64(&pmf.sum()) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = br(999, 1000).powu(20_000); // denominator far beyond f64 range
        let v = Scalar::to_f64(&big);
        let expect = (20_000f64 * (0.999f64).ln()).exp();
        assert!((v - expect).abs() / expect < 1e-9, "{v} vs {expect}");
    }
}
