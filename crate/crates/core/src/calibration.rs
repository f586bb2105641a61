//! Recover `(alpha, nu)` from observed population fractions.
//!
//! The non-infected fraction determines `alpha` directly
//! (`e^{-alpha} = frac`), because immunity only matters once someone has
//! been infected. The once-infected fraction then determines `nu` through
//! the limit formula for `pi'_1`, which is strictly increasing in `nu`
//! (derivative `alpha^2 (1 - nu) e^{(nu - 1) alpha} >= 0`), so bisection
//! inverts it reliably; Newton would be fragile at the flat right endpoint.

use crate::error::{Error, Result};
use crate::limit::{limit_pmf_term, ContinuousParams, Nu};

/// Residual tolerance for the bisection on `pi'_1`.
pub const NU_RESIDUAL_TOL: f64 = 1e-12;
/// Iteration cap for the bisection.
pub const NU_MAX_ITERATIONS: u32 = 200;
/// Observations this far outside the feasible interval are clamped to the
/// endpoint; anything farther is an error.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

/// Observed fractions of the population: never infected, and infected
/// exactly once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub frac_noninfected: f64,
    pub frac_once: f64,
}

impl Observation {
    pub fn new(frac_noninfected: f64, frac_once: f64) -> Result<Self> {
        for (name, v) in [
            ("frac_noninfected", frac_noninfected),
            ("frac_once", frac_once),
        ] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if frac_noninfected + frac_once > 1.0 {
            // Equivalent to frac_once > 1 - e^{-alpha}, the upper end of the
            // feasible pi'_1 range; report it as such.
            let alpha = -frac_noninfected.ln();
            return Err(Error::InfeasibleObservation {
                observed: frac_once,
                lo: alpha * (-alpha).exp(),
                hi: 1.0 - frac_noninfected,
            });
        }
        Ok(Self {
            frac_noninfected,
            frac_once,
        })
    }
}

/// `alpha = -ln(frac_noninfected)`, for a fraction in `(0, 1)`.
pub fn estimate_alpha(frac_noninfected: f64) -> Result<f64> {
    if !(0.0 < frac_noninfected && frac_noninfected < 1.0) {
        return Err(Error::Domain(format!(
            "noninfected fraction must lie in (0, 1), got {frac_noninfected}"
        )));
    }
    Ok(-frac_noninfected.ln())
}

fn pi1(alpha: f64, nu: f64) -> f64 {
    let cp = ContinuousParams::new(alpha, Nu::Real(nu)).expect("valid by construction");
    limit_pmf_term(&cp, 1)
}

/// Invert `nu -> pi'_1(alpha, nu)` on `[0, 1]` by bisection.
///
/// The observation must lie in `[alpha e^{-alpha}, 1 - e^{-alpha}]`, the
/// range of `pi'_1`; values within [`FEASIBILITY_MARGIN`] of an endpoint
/// are clamped onto it.
pub fn estimate_nu(alpha: f64, pi1_observed: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let lo_val = alpha * (-alpha).exp();
    let hi_val = 1.0 - (-alpha).exp();
    if pi1_observed < lo_val {
        if lo_val - pi1_observed <= FEASIBILITY_MARGIN {
            return Ok(0.0);
        }
        return Err(Error::InfeasibleObservation {
            observed: pi1_observed,
            lo: lo_val,
            hi: hi_val,
        });
    }
    if pi1_observed > hi_val {
        if pi1_observed - hi_val <= FEASIBILITY_MARGIN {
            return Ok(1.0);
        }
        return Err(Error::InfeasibleObservation {
            observed: pi1_observed,
            lo: lo_val,
            hi: hi_val,
        });
    }
    if pi1_observed == lo_val {
        return Ok(0.0);
    }
    if pi1_observed == hi_val {
        return Ok(1.0);
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    for _ in 0..NU_MAX_ITERATIONS {
        mid = 0.5 * (lo + hi);
        let v = pi1(alpha, mid);
        if (v - pi1_observed).abs() <= NU_RESIDUAL_TOL {
            return Ok(mid);
        }
        if v < pi1_observed {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * 2.0 {
            break;
        }
    }
    Ok(mid)
}

/// Full calibration: `alpha` from the non-infected fraction, then `nu`
/// from the once-infected fraction.
pub fn calibrate(obs: &Observation) -> Result<(f64, f64)> {
    let alpha = estimate_alpha(obs.frac_noninfected)?;
    let nu = estimate_nu(alpha, obs.frac_once)?;
    Ok((alpha, nu))
}
