//! Lattice reinfection-count distributions.
//!
//! An individual is exposed each of `n_days` days independently with
//! probability `beta`. An exposure becomes an infection only when no
//! immunity window is active; an infection on day `x` blocks days
//! `x+1 ..= x+immunity`, and the final window may run past the last day.
//! `pi_r` is the probability of exactly `r` infections.
//!
//! Three algebraically independent evaluations of the same distribution
//! live here (`pmf_direct`, `pmf_closed`, `pmf_derivative`); two more come
//! from the generating-function routes in [`crate::series`]. In exact mode
//! they agree as rational equalities.

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::scalar::{NumericMode, Scalar};

/// Parameters of the lattice model.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams<T> {
    n_days: u64,
    immunity: u64,
    beta: T,
}

impl<T: Scalar> LatticeParams<T> {
    /// `n_days >= 1`, `0 <= beta <= 1`. The disease duration is folded into
    /// `immunity`.
    pub fn new(n_days: u64, immunity: u64, beta: T) -> Result<Self> {
        if n_days == 0 {
            return Err(Error::InvalidParameter("n_days must be >= 1".into()));
        }
        if beta < T::zero() || beta > T::one() {
            return Err(Error::InvalidParameter("beta must lie in [0, 1]".into()));
        }
        Ok(Self {
            n_days,
            immunity,
            beta,
        })
    }

    pub fn n_days(&self) -> u64 {
        self.n_days
    }

    pub fn immunity(&self) -> u64 {
        self.immunity
    }

    pub fn beta(&self) -> &T {
        &self.beta
    }

    /// Survival probability `1 - beta` for a single day.
    pub fn no_exposure(&self) -> T {
        T::one() - self.beta.clone()
    }

    /// Largest infection count with positive probability.
    pub fn support_max(&self) -> u64 {
        support_max(self.n_days, self.immunity)
    }
}

/// Which formula produced a PMF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Closed,
    Derivative,
    Gf,
    Telescoped,
    Classical,
    Limit,
    Enumeration,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Closed => "closed",
            Method::Derivative => "derivative",
            Method::Gf => "gf",
            Method::Telescoped => "telescoped",
            Method::Classical => "classical",
            Method::Limit => "limit",
            Method::Enumeration => "enumeration",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "closed" => Ok(Method::Closed),
            "derivative" => Ok(Method::Derivative),
            "gf" => Ok(Method::Gf),
            "telescoped" => Ok(Method::Telescoped),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected direct|closed|derivative|gf|telescoped)"
            ))),
        }
    }
}

/// Finite probability mass function over infection counts `0..=r_max`,
/// tagged with the formula that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    probs: Vec<T>,
    method: Method,
    notes: Vec<String>,
}

impl<T: Scalar> Pmf<T> {
    pub fn from_probs(probs: Vec<T>, method: Method) -> Self {
        Self {
            probs,
            method,
            notes: Vec::new(),
        }
    }

    pub fn with_notes(probs: Vec<T>, method: Method, notes: Vec<String>) -> Self {
        Self {
            probs,
            method,
            notes,
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Probability of exactly `r` infections; zero beyond the stored support.
    pub fn prob(&self, r: u64) -> T {
        self.probs.get(r as usize).cloned().unwrap_or_else(T::zero)
    }

    pub fn r_max(&self) -> u64 {
        (self.probs.len() as u64).saturating_sub(1)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn mode(&self) -> NumericMode {
        T::MODE
    }

    /// Provenance notes, e.g. per-entry method fallbacks.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn sum(&self) -> T {
        self.probs.iter().fold(T::zero(), |acc, p| acc + p.clone())
    }

    pub fn to_f64_pmf(&self) -> Pmf<f64> {
        Pmf {
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
            method: self.method,
            notes: self.notes.clone(),
        }
    }
}

/// `floor((n + l) / (l + 1))`: the largest `r` for which `pi_r` can be
/// nonzero (the final immunity window may overhang the last day).
pub fn support_max(n_days: u64, immunity: u64) -> u64 {
    (n_days + immunity) / (immunity + 1)
}

/// Binomial probability of `r` exposures in `n_days` days:
/// `C(N, r) beta^r (1-beta)^{N-r}`; zero for `r > N`.
pub fn classical_pmf<T: Scalar>(params: &LatticeParams<T>, r: u64) -> T {
    let n = params.n_days;
    if r > n {
        return T::zero();
    }
    T::binom_weight(n, r, &params.beta, r, n - r)
}

/// Poisson mass `alpha^r e^{-alpha} / r!`, the `n_days -> inf` limit of
/// [`classical_pmf`] at `beta = alpha / n_days`.
pub fn poisson_pmf(alpha: f64, r: u64) -> f64 {
    debug_assert!(alpha > 0.0);
    (r as f64 * alpha.ln() - alpha - crate::scalar::ln_factorial(r)).exp()
}

/// Placement weight `P(r, n) = C(n - L r, r) beta^r (1-beta)^{n - L r - r}`
/// for `r` infections whose immunity windows all close by day `n`;
/// zero when `r < 0` or `n < L r + r`. Total in both arguments.
pub fn hardcore_term<T: Scalar>(params: &LatticeParams<T>, r: i64, n: i64) -> T {
    if r < 0 {
        return T::zero();
    }
    let r = r as u64;
    let l = params.immunity;
    // n < L*r + r, with care for negative n.
    if n < 0 || (n as u64) < l * r + r {
        return T::zero();
    }
    let m = n as u64 - l * r;
    T::binom_weight(m, r, &params.beta, r, m - r)
}

/// Probability of exactly `r` infections:
/// `P(r, N) + beta * sum_{i=1}^{L} P(r-1, N-i)`.
///
/// The first term covers configurations whose last window closes in time;
/// the sum covers a final infection on day `N - i + 1` whose window
/// overhangs. Reduces to [`classical_pmf`] at `L = 0`, and `pi_0` is always
/// `(1-beta)^N`.
pub fn pmf_direct<T: Scalar>(params: &LatticeParams<T>, r: u64) -> T {
    let n = params.n_days as i64;
    let mut acc = hardcore_term(params, r as i64, n);
    if r >= 1 {
        let mut tail = T::zero();
        for i in 1..=params.immunity as i64 {
            tail = tail + hardcore_term(params, r as i64 - 1, n - i);
        }
        acc = acc + params.beta.clone() * tail;
    }
    acc
}

/// Single-sum form with `m = N - L(r-1) - r` terms:
/// `beta^r * sum_{s=0}^{m} C(s+r-1, r-1) (1-beta)^{max(m-L, s)}`.
///
/// Zero when `m < 0`; `r = 0` is completed as `(1-beta)^N`.
pub fn pmf_closed<T: Scalar>(params: &LatticeParams<T>, r: u64) -> T {
    let n = params.n_days;
    let l = params.immunity;
    if r == 0 {
        return params.no_exposure().powu(n);
    }
    let needed = l * (r - 1) + r;
    if n < needed {
        return T::zero();
    }
    let m = n - needed;
    let mut acc = T::zero();
    for s in 0..=m {
        let ec = if m >= l { (m - l).max(s) } else { s };
        acc = acc + T::binom_weight(s + r - 1, r - 1, &params.beta, r, ec);
    }
    acc
}

/// Derivative form of `pi_r` with `O(r^2)` terms, independent of `L`.
///
/// `pi_r = C(A, r) beta^r x^{A-r} + sum_{i+j <= r-1} t(i, j)` with
/// `A = N - L r`, `x = 1 - beta`, and
///
/// - `t(i, 0) =  C(A, i) beta^i x^{A-i} (1 - x^L)`
/// - `t(i, j) = -C(A, i) C(L, j) beta^{i+j} x^{A-i+L-j}` for `j >= 1`,
///
/// which is the generalized Leibniz expansion of the `(r-1)`-th derivative
/// of `X^A (1 - X^L) / (1 - X)` over its three factors.
///
/// Requires `r >= 1`, `L >= 1`, and `N - L r > 0`.
pub fn pmf_derivative<T: Scalar>(params: &LatticeParams<T>, r: u64) -> Result<T> {
    let n = params.n_days;
    let l = params.immunity;
    if r < 1 {
        return Err(Error::Domain(format!(
            "pmf_derivative requires r >= 1 (got r = {r})"
        )));
    }
    if l < 1 {
        return Err(Error::Domain(
            "pmf_derivative requires immunity >= 1 (got 0)".into(),
        ));
    }
    if n <= l * r {
        return Err(Error::Domain(format!(
            "pmf_derivative requires n_days - immunity * r > 0 (got {n} - {l} * {r} = {})",
            n as i64 - (l * r) as i64
        )));
    }
    let a = n - l * r;
    let x = params.no_exposure();
    let beta = &params.beta;

    let mut acc = if a >= r {
        T::binom_weight(a, r, beta, r, a - r)
    } else {
        T::zero()
    };
    let one_minus_xl = T::one_minus_powu(&x, l);
    for i in 0..r {
        let ca: T = binomial(a, i);
        if ca.is_zero() {
            continue;
        }
        let base = ca * beta.powu(i) * x.powu(a - i);
        // j = 0 keeps the (1 - X^L) factor underived.
        acc = acc + base.clone() * one_minus_xl.clone();
        for j in 1..(r - i) {
            if j > l {
                break;
            }
            let cl: T = binomial(l, j);
            acc = acc - base.clone() * cl * beta.powu(j) * x.powu(l - j);
        }
    }
    Ok(acc)
}

/// The full distribution over `r = 0 ..= support_max`, by any method.
///
/// Entries a method cannot produce (derivative at `r = 0` or where
/// `N - L r <= 0`) fall back to the direct formula; each fallback is
/// recorded in the PMF's notes.
pub fn full_pmf<T: Scalar>(params: &LatticeParams<T>, method: Method) -> Result<Pmf<T>> {
    let r_max = params.support_max();
    let mut notes = Vec::new();
    let probs: Vec<T> = match method {
        Method::Direct => (0..=r_max).map(|r| pmf_direct(params, r)).collect(),
        Method::Classical => (0..=r_max).map(|r| classical_pmf(params, r)).collect(),
        Method::Closed => (0..=r_max).map(|r| pmf_closed(params, r)).collect(),
        Method::Derivative => (0..=r_max)
            .map(|r| match pmf_derivative(params, r) {
                Ok(v) => v,
                Err(e) => {
                    notes.push(format!("r={r}: direct used ({e})"));
                    pmf_direct(params, r)
                }
            })
            .collect(),
        Method::Gf => {
            let series = crate::series::expand_closed_gf(params, params.n_days as usize)?;
            let coeff = series.coeff(params.n_days as usize);
            (0..=r_max).map(|r| coeff.coeff(r as usize)).collect()
        }
        Method::Telescoped => {
            let mut pi = Vec::with_capacity(r_max as usize + 2);
            for r in 0..=r_max + 1 {
                pi.push(crate::series::tail_gf_coefficient(
                    params,
                    params.n_days as usize,
                    r,
                )?);
            }
            (0..=r_max as usize)
                .map(|r| pi[r].clone() - pi[r + 1].clone())
                .collect()
        }
        Method::Limit | Method::Enumeration => {
            return Err(Error::InvalidParameter(format!(
                "full_pmf does not dispatch method `{}`",
                method.name()
            )))
        }
    };
    Ok(Pmf::with_notes(probs, method, notes))
}
