//! Continuous limit of the lattice distribution.
//!
//! With `beta = alpha / n_days` and `immunity / n_days -> nu`, the lattice
//! PMF converges to a finite distribution `{pi'_r}` on
//! `r = 0 ..= floor(1/nu) + 1` whose terms telescope: the partial sums have
//! the closed form evaluated by [`limit_partial_sum`], so the full
//! distribution sums to one by construction.
//!
//! Everything here is float-only; the formulas are exponential in `alpha`.

use crate::dist::{poisson_pmf, Method, Pmf};
use crate::error::{Error, Result};

/// Limit ratio `nu = lim immunity / n_days`, kept in exact form when the
/// caller has one so that integrality of `1/nu` is decided exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nu {
    /// `num / den` with `den >= 1`.
    Ratio(u64, u64),
    Real(f64),
}

impl Nu {
    pub fn value(&self) -> f64 {
        match *self {
            Nu::Ratio(n, d) => n as f64 / d as f64,
            Nu::Real(v) => v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Nu::Ratio(n, _) => n == 0,
            Nu::Real(v) => v == 0.0,
        }
    }

    /// `(floor(1/nu), whether 1/nu is an integer)`. Exact for the rational
    /// representation; for reals, a relative slack of `1e-9` on `1/nu`
    /// counts as integral so the support index is deterministic.
    fn recip_floor(&self) -> (u64, bool) {
        match *self {
            Nu::Ratio(n, d) => (d / n, d % n == 0),
            Nu::Real(v) => {
                let recip = 1.0 / v;
                let nearest = recip.round();
                if (recip - nearest).abs() < 1e-9 && nearest >= 1.0 {
                    (nearest as u64, true)
                } else {
                    (recip.floor() as u64, false)
                }
            }
        }
    }

    /// Parse `p/q` or a decimal literal.
    pub fn parse(s: &str) -> Result<Nu> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num: u64 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse nu literal `{s}`")))?;
            let den: u64 = q
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse nu literal `{s}`")))?;
            if den == 0 {
                return Err(Error::InvalidParameter("nu denominator is zero".into()));
            }
            Ok(Nu::Ratio(num, den))
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse nu literal `{s}`")))?;
            Ok(Nu::Real(v))
        }
    }

    pub fn render(&self) -> String {
        match *self {
            Nu::Ratio(n, d) => format!("{n}/{d}"),
            Nu::Real(v) => format!("{v:.14e}"),
        }
    }
}

/// Parameters of the continuous limit: `alpha` (expected exposures per
/// cycle) and `nu` (immunity fraction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousParams {
    alpha: f64,
    nu: Nu,
}

impl ContinuousParams {
    pub fn new(alpha: f64, nu: Nu) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        let v = nu.value();
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter("nu must lie in [0, 1]".into()));
        }
        Ok(Self { alpha, nu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> Nu {
        self.nu
    }
}

/// Support indices of the limit distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitSupport {
    /// `floor(1/nu)`: the last index where the series formula applies.
    pub r_flat: u64,
    /// `r_flat + 1`: the boundary index. Its probability is exactly zero
    /// when `1/nu` is an integer.
    pub r_sharp: u64,
    /// Whether `1/nu` was detected as an integer.
    pub recip_integral: bool,
}

/// Compute the support indices; `nu = 0` has unbounded support (classical
/// Poisson regime) and is signalled as an error.
pub fn limit_support(nu: Nu) -> Result<LimitSupport> {
    if nu.is_zero() {
        return Err(Error::UnboundedSupport);
    }
    let (r_flat, recip_integral) = nu.recip_floor();
    Ok(LimitSupport {
        r_flat,
        r_sharp: r_flat + 1,
        recip_integral,
    })
}

/// Closed form of the partial sum `sum_{s=0}^{r} pi'_s`:
/// `e^{(r nu - 1) alpha} * sum_{k=0}^{r} (alpha (1 - r nu))^k / k!`.
pub fn limit_partial_sum(alpha: f64, nu: f64, r: u64) -> f64 {
    let x = alpha * (1.0 - r as f64 * nu);
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..=r {
        term *= x / k as f64;
        sum += term;
    }
    ((r as f64 * nu - 1.0) * alpha).exp() * sum
}

/// `pi'_r` for the given parameters.
///
/// - `nu = 0`: the classical Poisson mass `alpha^r e^{-alpha} / r!`.
/// - `r <= floor(1/nu)`: difference of two consecutive partial sums.
/// - `r = floor(1/nu) + 1`: the boundary mass `1 - partial_sum(r - 1)`
///   absorbed by the overhanging final window.
/// - larger `r`: zero.
pub fn limit_pmf_term(cparams: &ContinuousParams, r: u64) -> f64 {
    let alpha = cparams.alpha;
    let nu = cparams.nu;
    if nu.is_zero() {
        return poisson_pmf(alpha, r);
    }
    let support = limit_support(nu).expect("nu > 0 checked above");
    let v = nu.value();
    if r == 0 {
        return (-alpha).exp();
    }
    if r <= support.r_flat {
        return limit_partial_sum(alpha, v, r) - limit_partial_sum(alpha, v, r - 1);
    }
    if r == support.r_sharp {
        return 1.0 - limit_partial_sum(alpha, v, support.r_flat);
    }
    0.0
}

/// The whole limit distribution.
///
/// Entries run over `0 ..= r_flat`, plus the boundary index when `1/nu` is
/// not an integer (when it is, the boundary mass is exactly zero and the
/// entry is omitted). Requires `nu > 0`.
pub fn full_limit_pmf(cparams: &ContinuousParams) -> Result<Pmf<f64>> {
    let support = limit_support(cparams.nu)?;
    let mut upper = support.r_flat;
    if !support.recip_integral {
        upper = support.r_sharp;
    }
    let probs = (0..=upper).map(|r| limit_pmf_term(cparams, r)).collect();
    Ok(Pmf::from_probs(probs, Method::Limit))
}
