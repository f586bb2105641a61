//! Truncated bivariate power series and rational generating functions.
//!
//! Series live in `t` (day count) with coefficients that are polynomials in
//! the marker variable `u` (infection count). Expanding the closed-form
//! generating function of the lattice model and reading off the coefficient
//! of `t^n u^r` gives a route to `pi_r` that shares no algebra with the
//! formulas in [`crate::dist`].

use num::traits::Zero;

use crate::dist::{support_max, LatticeParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense polynomial in the marker variable `u`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct UPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UPoly<T> {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(degree: usize, c: T) -> Self {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `u^k`; zero beyond the stored degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, u: &T) -> T {
        // Horner.
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * u.clone() + c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Product truncated at `u^cap` when a cap is given.
    pub fn mul_capped(&self, other: &Self, cap: Option<usize>) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let full = self.coeffs.len() + other.coeffs.len() - 2;
        let deg = cap.map_or(full, |c| full.min(c));
        let mut coeffs = vec![T::zero(); deg + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > deg || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > deg {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// Shift by one power of `u` (multiply by `u`), truncating at the cap.
    pub fn shift_u(&self, cap: Option<usize>) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        if let Some(c) = cap {
            coeffs.truncate(c + 1);
        }
        Self::from_coeffs(coeffs)
    }
}

/// Formal power series in `t`, truncated at `t^t_order`, with [`UPoly`]
/// coefficients capped at a configurable `u` degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<UPoly<T>>,
    u_cap: Option<usize>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn zero(t_order: usize, u_cap: Option<usize>) -> Self {
        Self {
            coeffs: vec![UPoly::zero(); t_order + 1],
            u_cap,
        }
    }

    pub fn from_t_coeffs(mut coeffs: Vec<UPoly<T>>, t_order: usize, u_cap: Option<usize>) -> Self {
        coeffs.resize(t_order + 1, UPoly::zero());
        Self { coeffs, u_cap }
    }

    pub fn t_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn u_cap(&self) -> Option<usize> {
        self.u_cap
    }

    /// Coefficient of `t^n`.
    pub fn coeff(&self, n: usize) -> &UPoly<T> {
        &self.coeffs[n]
    }

    /// Coefficient of `t^n u^r`.
    pub fn extract(&self, n: usize, r: usize) -> T {
        self.coeffs[n].coeff(r)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.t_order().min(other.t_order());
        let coeffs = (0..=order)
            .map(|n| self.coeffs[n].add(&other.coeffs[n]))
            .collect();
        Self {
            coeffs,
            u_cap: self.u_cap,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.t_order().min(other.t_order());
        let mut coeffs = vec![UPoly::zero(); order + 1];
        for i in 0..=order {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=order - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let prod = self.coeffs[i].mul_capped(&other.coeffs[j], self.u_cap);
                coeffs[i + j] = coeffs[i + j].add(&prod);
            }
        }
        Self {
            coeffs,
            u_cap: self.u_cap,
        }
    }

    /// Multiply by a polynomial in `t` (given as its coefficient list).
    pub fn mul_t_poly(&self, poly: &[UPoly<T>]) -> Self {
        let order = self.t_order();
        let mut coeffs = vec![UPoly::zero(); order + 1];
        for (j, p) in poly.iter().enumerate() {
            if j > order || p.is_zero() {
                continue;
            }
            for i in 0..=order - j {
                if self.coeffs[i].is_zero() {
                    continue;
                }
                let prod = self.coeffs[i].mul_capped(p, self.u_cap);
                coeffs[i + j] = coeffs[i + j].add(&prod);
            }
        }
        Self {
            coeffs,
            u_cap: self.u_cap,
        }
    }
}

/// A rational function of `t`: numerator and denominator polynomials with
/// [`UPoly`] coefficients. The denominator's constant term must be `1` for
/// the series expansion to exist.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalGF<T> {
    pub num: Vec<UPoly<T>>,
    pub den: Vec<UPoly<T>>,
}

/// Expand `gf.num / gf.den` as a power series in `t`, truncated at
/// `t^t_order`, by long division. Errors unless the denominator's constant
/// term is exactly `1`.
pub fn series_of_rational<T: Scalar>(
    gf: &RationalGF<T>,
    t_order: usize,
    u_cap: Option<usize>,
) -> Result<TruncatedSeries<T>> {
    let den0 = gf.den.first().cloned().unwrap_or_else(UPoly::zero);
    if den0 != UPoly::one() {
        return Err(Error::Domain(
            "series expansion requires a denominator with constant term 1".into(),
        ));
    }
    let num_at = |n: usize| gf.num.get(n).cloned().unwrap_or_else(UPoly::zero);
    let mut coeffs: Vec<UPoly<T>> = Vec::with_capacity(t_order + 1);
    for n in 0..=t_order {
        // c_n = num_n - sum_{k >= 1} den_k c_{n-k}
        let mut acc = num_at(n);
        for (k, d) in gf.den.iter().enumerate().skip(1) {
            if k > n {
                break;
            }
            if d.is_zero() || coeffs[n - k].is_zero() {
                continue;
            }
            acc = acc.sub(&d.mul_capped(&coeffs[n - k], u_cap));
        }
        if let Some(cap) = u_cap {
            acc = UPoly::from_coeffs(acc.coeffs().iter().take(cap + 1).cloned().collect());
        }
        coeffs.push(acc);
    }
    Ok(TruncatedSeries { coeffs, u_cap })
}

/// Closed-form generating function of the lattice model over a common
/// denominator:
///
/// `G(t, u) = (1 - t + beta u t (1 - t^L)) / ((1-t)(1 - (1-beta) t - beta u t^{L+1}))`
///
/// The coefficient of `t^N u^r` is `pi_r(N, L)`. Valid for any `L >= 0`
/// (at `L = 0` the numerator degenerates to `1 - t` and the expansion is
/// the classical binomial one).
pub fn gf_closed<T: Scalar>(params: &LatticeParams<T>) -> RationalGF<T> {
    let l = params.immunity() as usize;
    let beta = params.beta().clone();
    let x = params.no_exposure();

    // Numerator: 1 - t + beta*u*t - beta*u*t^{L+1}, built additively so that
    // L = 0 merges the t^1 contributions.
    let mut num = vec![UPoly::zero(); l + 2];
    num[0] = UPoly::one();
    num[1] = num[1].add(&UPoly::constant(-T::one()));
    num[1] = num[1].add(&UPoly::monomial(1, beta.clone()));
    num[l + 1] = num[l + 1].add(&UPoly::monomial(1, -beta.clone()));

    // Inner denominator: 1 - (1-beta) t - beta u t^{L+1}.
    let mut inner = vec![UPoly::zero(); l + 2];
    inner[0] = UPoly::one();
    inner[1] = inner[1].add(&UPoly::constant(-x));
    inner[l + 1] = inner[l + 1].add(&UPoly::monomial(1, -beta));

    // Multiply by (1 - t).
    let mut den = vec![UPoly::zero(); l + 3];
    for (i, c) in inner.iter().enumerate() {
        den[i] = den[i].add(c);
        den[i + 1] = den[i + 1].sub(c);
    }
    while den.last().is_some_and(UPoly::is_zero) {
        den.pop();
    }
    while num.last().is_some_and(UPoly::is_zero) {
        num.pop();
    }
    RationalGF { num, den }
}

/// Expand [`gf_closed`] far enough to read `t^n` coefficients for all
/// `n <= t_order`, with the `u` cap set to the largest possible support.
pub fn expand_closed_gf<T: Scalar>(
    params: &LatticeParams<T>,
    t_order: usize,
) -> Result<TruncatedSeries<T>> {
    let cap = support_max(t_order.max(1) as u64, params.immunity()) as usize;
    series_of_rational(&gf_closed(params), t_order, Some(cap))
}

/// Coefficient of `t^n u^r` in the closed-form generating function;
/// equals `pmf_direct(params, r)` at `n = n_days`.
pub fn pmf_from_gf<T: Scalar>(params: &LatticeParams<T>, n: u64, r: u64) -> Result<T> {
    let cap = support_max(n.max(1), params.immunity());
    if r > cap {
        return Err(Error::Domain(format!(
            "r = {r} exceeds the u-cap {cap} for n = {n}"
        )));
    }
    let series = series_of_rational(&gf_closed(params), n as usize, Some(cap as usize))?;
    Ok(series.extract(n as usize, r as usize))
}

/// Weighted tiling sequence: coverings of a length-`n` segment by single
/// cells (weight `mono_w`) and blocks of `l + 1` cells (weight `long_w`,
/// marked by one power of `u`).
///
/// `g_0 = 1`, `g_n = mono_w * g_{n-1} + long_w * u * g_{n-l-1}`.
///
/// With both weights set to `1` and `l = 1` this is the Fibonacci sequence
/// shifted by one.
pub fn tiling_sequence<T: Scalar>(mono_w: &T, long_w: &T, l: u64, n_max: u64) -> Vec<UPoly<T>> {
    let span = l as usize + 1;
    let mut g: Vec<UPoly<T>> = Vec::with_capacity(n_max as usize + 1);
    g.push(UPoly::one());
    for n in 1..=n_max as usize {
        let mut next = g[n - 1].scale(mono_w);
        if n >= span {
            next = next.add(&g[n - span].scale(long_w).shift_u(None));
        }
        g.push(next);
    }
    g
}

/// `g_0 ..= g_{n_max}` for the lattice model's tiling weights
/// (`mono_w = 1 - beta`, `long_w = beta`): the coefficient of `u^r` in `g_n`
/// is the no-overhang placement weight `P(r, n)`.
pub fn tiling_recurrence<T: Scalar>(params: &LatticeParams<T>, n_max: u64) -> Vec<UPoly<T>> {
    tiling_sequence(
        &params.no_exposure(),
        params.beta(),
        params.immunity(),
        n_max,
    )
}

// beta^r / ((1-t)(1 - x t)^r); the monomial shift t^{(L+1)r - L} is applied
// by the callers through index arithmetic.
fn tail_gf<T: Scalar>(params: &LatticeParams<T>, r: u64) -> RationalGF<T> {
    let x = params.no_exposure();
    let mut den: Vec<T> = vec![T::one(), -T::one()];
    for _ in 0..r {
        let mut next = vec![T::zero(); den.len() + 1];
        for (i, c) in den.iter().enumerate() {
            next[i] = next[i].clone() + c.clone();
            next[i + 1] = next[i + 1].clone() - c.clone() * x.clone();
        }
        den = next;
    }
    RationalGF {
        num: vec![UPoly::constant(params.beta().powu(r))],
        den: den.into_iter().map(UPoly::constant).collect(),
    }
}

/// Coefficient of `t^n` in the tail generating function
/// `Pi_r = beta^r t^{(L+1) r - L} / ((1-t)(1 - (1-beta) t)^r)` for `r >= 1`,
/// and `Pi_0 = 1/(1-t)`. `Pi_r - Pi_{r+1}` generates `pi_r`.
pub fn tail_gf_coefficient<T: Scalar>(params: &LatticeParams<T>, n: usize, r: u64) -> Result<T> {
    if r == 0 {
        return Ok(T::one());
    }
    let l = params.immunity();
    let shift = ((l + 1) * r - l) as usize;
    if n < shift {
        return Ok(T::zero());
    }
    let series = series_of_rational(&tail_gf(params, r), n - shift, Some(0))?;
    Ok(series.extract(n - shift, 0))
}

/// All coefficients `t^0 ..= t^order` of `Pi_r` in one expansion. Long
/// division is prefix-stable, so entry `n` equals
/// `tail_gf_coefficient(params, n, r)` exactly.
pub fn tail_gf_coefficients<T: Scalar>(
    params: &LatticeParams<T>,
    order: usize,
    r: u64,
) -> Result<Vec<T>> {
    if r == 0 {
        return Ok(vec![T::one(); order + 1]);
    }
    let l = params.immunity();
    let shift = ((l + 1) * r - l) as usize;
    let mut out = vec![T::zero(); order + 1];
    if shift > order {
        return Ok(out);
    }
    let series = series_of_rational(&tail_gf(params, r), order - shift, Some(0))?;
    for i in 0..=order - shift {
        out[shift + i] = series.extract(i, 0);
    }
    Ok(out)
}

/// `pi_r` as the coefficient of `t^n` in `Pi_r - Pi_{r+1}`.
pub fn pmf_telescoped<T: Scalar>(params: &LatticeParams<T>, n: u64, r: u64) -> Result<T> {
    let hi = tail_gf_coefficient(params, n as usize, r)?;
    let lo = tail_gf_coefficient(params, n as usize, r + 1)?;
    Ok(hi - lo)
}
