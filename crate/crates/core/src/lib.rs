//! Reinfection-count distributions for a 1D hardcore exposure process.
//!
//! Days `1..=N` carry independent exposure events with probability `beta`;
//! an exposure infects only outside an immunity window, and each infection
//! opens one of length `L` (which may overhang day `N`). The number of
//! infections then follows a finite truncation of the Poisson law. This
//! crate evaluates that distribution:
//!
//! - [`dist`] — direct, closed-form and derivative-form lattice PMFs;
//! - [`limit`] — the continuous limit (`beta = alpha/N`, `L/N -> nu`);
//! - [`series`] — truncated power series, the closed-form generating
//!   function and its telescoping presentation, two more routes to the PMF;
//! - [`multistrain`] — joint counts for several concurrent strains;
//! - [`oracles`] — exhaustive enumeration and reproducible Monte Carlo;
//! - [`calibration`] — recovering `(alpha, nu)` from observed fractions.
//!
//! All lattice math is generic over [`Scalar`]: [`Exact`] makes the
//! cross-method identities exact rational equalities, [`Float`] keeps large
//! parameters fast via log-space evaluation.

pub mod calibration;
pub mod combinatorics;
pub mod dist;
mod error;
pub mod limit;
pub mod multistrain;
pub mod oracles;
mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{NumericMode, Scalar};

/// Exact rational scalar: arbitrary-precision `p/q`.
pub type Exact = num::BigRational;

/// Floating-point scalar used by the fast paths.
pub type Float = f64;

pub use dist::{
    classical_pmf, full_pmf, hardcore_term, pmf_closed, pmf_derivative, pmf_direct, poisson_pmf,
    support_max, LatticeParams, Method, Pmf,
};
pub use limit::{
    full_limit_pmf, limit_pmf_term, limit_support, ContinuousParams, LimitSupport, Nu,
};
