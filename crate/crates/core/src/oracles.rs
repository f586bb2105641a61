//! Formula-independent sources of truth.
//!
//! [`enumerate_exact`] walks every daily outcome sequence and applies the
//! day-by-day immunity rule directly — no binomial identities, no
//! generating functions — so it can arbitrate between the analytic routes.
//! It is deliberately restricted to exact arithmetic: an oracle must not
//! carry rounding error.
//!
//! [`simulate`] is the statistical counterpart for parameter ranges
//! enumeration cannot reach. Each trial consumes its own RNG stream derived
//! from `(seed, trial index)`, so histograms are bit-identical for any
//! worker partitioning.

use num::traits::{One, Zero};

use crate::dist::{support_max, LatticeParams, Method, Pmf};
use crate::error::{Error, Result};
use crate::multistrain::{JointPmf, StrainSet};
use crate::scalar::Scalar;
use crate::Exact;

/// Default cap on `(k+1)^n` enumerated sequences (`n = 14` at `k = 1`).
pub const DEFAULT_ENUM_CAP: u64 = 1 << 14;

/// Monte Carlo configuration. Identical `(trials, seed)` give identical
/// reports regardless of `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        Ok(Self {
            trials,
            seed,
            workers: 1,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        self.workers = workers;
        Ok(self)
    }
}

/// Histogram of simulated infection counts with derived statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimReport {
    histogram: Vec<u64>,
    trials: u64,
}

impl SimReport {
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn empirical(&self) -> Vec<f64> {
        self.histogram
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    /// Standard error per bin, `sqrt(p_hat (1 - p_hat) / trials)`.
    pub fn std_errors(&self) -> Vec<f64> {
        self.empirical()
            .iter()
            .map(|&p| (p * (1.0 - p) / self.trials as f64).sqrt())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

fn check_enum_cap(outcomes: u64, n: u64, cap: u64) -> Result<()> {
    let mut total: u64 = 1;
    for _ in 0..n {
        total = total.saturating_mul(outcomes);
        if total > cap {
            return Err(Error::ResourceLimit(format!(
                "enumeration would visit {outcomes}^{n} sequences (cap {cap})"
            )));
        }
    }
    Ok(())
}

/// Exact single-strain distribution by exhaustive enumeration of all `2^n`
/// exposure sequences.
pub fn enumerate_exact(params: &LatticeParams<Exact>, n: u64) -> Result<Pmf<Exact>> {
    enumerate_exact_with_cap(params, n, DEFAULT_ENUM_CAP)
}

pub fn enumerate_exact_with_cap(
    params: &LatticeParams<Exact>,
    n: u64,
    cap: u64,
) -> Result<Pmf<Exact>> {
    check_enum_cap(2, n, cap)?;
    // Depth-first over days; immune days contribute total weight 1 and are
    // skipped, which is an exact marginalization of their outcomes.
    struct Walk<'a> {
        n: u64,
        immunity: u64,
        beta: &'a Exact,
        no_exposure: &'a Exact,
        probs: Vec<Exact>,
    }
    impl Walk<'_> {
        fn step(&mut self, day: u64, immune: u64, r: usize, w: Exact) {
            if day > self.n {
                self.probs[r] = self.probs[r].clone() + w;
                return;
            }
            if immune > 0 {
                self.step(day + 1, immune - 1, r, w);
                return;
            }
            if !self.no_exposure.is_zero() {
                self.step(day + 1, 0, r, w.clone() * self.no_exposure.clone());
            }
            if !self.beta.is_zero() {
                self.step(day + 1, self.immunity, r + 1, w * self.beta.clone());
            }
        }
    }
    let no_exposure = params.no_exposure();
    let mut walk = Walk {
        n,
        immunity: params.immunity(),
        beta: params.beta(),
        no_exposure: &no_exposure,
        probs: vec![Exact::zero(); support_max(n.max(1), params.immunity()) as usize + 1],
    };
    walk.step(1, 0, 0, Exact::one());
    Ok(Pmf::from_probs(walk.probs, Method::Enumeration))
}

/// Exact joint distribution for a strain set by exhaustive enumeration of
/// all `(k+1)^n` daily outcome sequences.
pub fn enumerate_exact_multi(ss: &StrainSet<Exact>, n: u64, cap: u64) -> Result<JointPmf<Exact>> {
    check_enum_cap(ss.k() as u64 + 1, n, cap)?;
    let dims: Vec<usize> = ss
        .strains()
        .iter()
        .map(|s| support_max(n.max(1), s.immunity) as usize + 1)
        .collect();
    let data = vec![Exact::zero(); dims.iter().product()];

    struct Walk<'a> {
        n: u64,
        ss: &'a StrainSet<Exact>,
        beta0: Exact,
        counts: Vec<usize>,
        table: JointTable,
    }
    impl Walk<'_> {
        fn step(&mut self, day: u64, immune: u64, w: Exact) {
            if day > self.n {
                self.table.bump(&self.counts, w);
                return;
            }
            if immune > 0 {
                self.step(day + 1, immune - 1, w);
                return;
            }
            if !self.beta0.is_zero() {
                self.step(day + 1, 0, w.clone() * self.beta0.clone());
            }
            for i in 0..self.ss.k() {
                let strain = &self.ss.strains()[i];
                if strain.beta.is_zero() {
                    continue;
                }
                let (beta, immunity) = (strain.beta.clone(), strain.immunity);
                self.counts[i] += 1;
                self.step(day + 1, immunity, w.clone() * beta);
                self.counts[i] -= 1;
            }
        }
    }

    let mut walk = Walk {
        n,
        ss,
        beta0: ss.beta0(),
        counts: vec![0usize; ss.k()],
        table: JointTable { dims, data },
    };
    walk.step(1, 0, Exact::one());
    Ok(JointPmf::from_parts(walk.table.dims, walk.table.data))
}

struct JointTable {
    dims: Vec<usize>,
    data: Vec<Exact>,
}

impl JointTable {
    fn bump(&mut self, idx: &[usize], w: Exact) {
        let mut off = 0;
        for (i, d) in idx.iter().zip(&self.dims) {
            off = off * d + i;
        }
        self.data[off] = self.data[off].clone() + w;
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// splitmix64: one 64-bit state, fixed increment, platform-independent.
#[derive(Debug, Clone)]
struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    /// Stream for one trial; mixing the trial index through the increment
    /// decorrelates neighbouring trials.
    fn for_trial(seed: u64, trial: u64) -> Self {
        let mut s = Self {
            state: seed ^ GOLDEN.wrapping_mul(trial.wrapping_add(1)),
        };
        s.next_u64(); // burn-in
        s
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn run_trial_single(params: &LatticeParams<f64>, rng: &mut SplitMix64) -> usize {
    let beta = *params.beta();
    let l = params.immunity();
    let mut r = 0usize;
    let mut day = 1u64;
    while day <= params.n_days() {
        if rng.next_f64() < beta {
            r += 1;
            day += l + 1; // immune days are non-events and consume no RNG
        } else {
            day += 1;
        }
    }
    r
}

/// Monte Carlo estimate of the single-strain distribution.
///
/// Trials are partitioned into `cfg.workers` contiguous chunks; because
/// every trial derives its RNG stream from `(seed, trial index)` alone and
/// the merge is an additive histogram sum, the report is bit-identical for
/// every worker count.
pub fn simulate(params: &LatticeParams<f64>, cfg: &SimConfig) -> SimReport {
    let bins = params.support_max() as usize + 1;
    let chunk = cfg.trials.div_ceil(cfg.workers as u64);
    let histogram = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..cfg.workers as u64 {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(cfg.trials);
            if lo >= hi {
                break;
            }
            handles.push(scope.spawn(move || {
                let mut hist = vec![0u64; bins];
                for trial in lo..hi {
                    let mut rng = SplitMix64::for_trial(cfg.seed, trial);
                    hist[run_trial_single(params, &mut rng)] += 1;
                }
                hist
            }));
        }
        let mut total = vec![0u64; bins];
        for h in handles {
            for (t, c) in total.iter_mut().zip(h.join().expect("worker panicked")) {
                *t += c;
            }
        }
        total
    });
    SimReport {
        histogram,
        trials: cfg.trials,
    }
}

/// Joint Monte Carlo for a strain set. Same determinism contract as
/// [`simulate`]; the histogram is dense row-major over per-axis bounds.
pub fn simulate_multi(ss: &StrainSet<f64>, n: u64, cfg: &SimConfig) -> (Vec<usize>, Vec<u64>) {
    let dims: Vec<usize> = ss
        .strains()
        .iter()
        .map(|s| support_max(n.max(1), s.immunity) as usize + 1)
        .collect();
    let strides: Vec<usize> = (0..dims.len())
        .map(|a| dims[a + 1..].iter().product())
        .collect();
    let thresholds: Vec<f64> = ss
        .strains()
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s.beta;
            Some(*acc)
        })
        .collect();
    let chunk = cfg.trials.div_ceil(cfg.workers as u64);
    let len: usize = dims.iter().product();
    let histogram = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..cfg.workers as u64 {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(cfg.trials);
            if lo >= hi {
                break;
            }
            let thresholds = &thresholds;
            let strides = &strides;
            let ss = &ss;
            handles.push(scope.spawn(move || {
                let mut hist = vec![0u64; len];
                for trial in lo..hi {
                    let mut rng = SplitMix64::for_trial(cfg.seed, trial);
                    let mut day = 1u64;
                    let mut off = 0usize;
                    while day <= n {
                        let u = rng.next_f64();
                        match thresholds.iter().position(|&t| u < t) {
                            Some(i) => {
                                off += strides[i];
                                day += ss.strains()[i].immunity + 1;
                            }
                            None => day += 1,
                        }
                    }
                    hist[off] += 1;
                }
                hist
            }));
        }
        let mut total = vec![0u64; len];
        for h in handles {
            for (t, c) in total.iter_mut().zip(h.join().expect("worker panicked")) {
                *t += c;
            }
        }
        total
    });
    (dims, histogram)
}

// ---------------------------------------------------------------------------
// Comparison harness
// ---------------------------------------------------------------------------

/// Per-bin diagnostic from a comparison.
#[derive(Debug, Clone)]
pub struct BinDiagnostic {
    pub r: u64,
    pub observed: f64,
    pub expected: f64,
    /// Standard deviations from expectation (statistical policy only).
    pub sigmas: Option<f64>,
    pub ok: bool,
}

/// Result of [`compare_exact`] or [`compare_stat`].
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub pass: bool,
    pub bins: Vec<BinDiagnostic>,
    /// Pearson chi-square statistic over bins with positive expectation
    /// (statistical policy only).
    pub chi_square: Option<f64>,
}

impl CompareReport {
    pub fn failed_bins(&self) -> Vec<u64> {
        self.bins.iter().filter(|b| !b.ok).map(|b| b.r).collect()
    }
}

/// Bin-by-bin rational equality of two exact PMFs over the same support.
pub fn compare_exact(observed: &Pmf<Exact>, expected: &Pmf<Exact>) -> Result<CompareReport> {
    if observed.probs().len() != expected.probs().len() {
        return Err(Error::SupportMismatch(format!(
            "observed has {} bins, expected has {}",
            observed.probs().len(),
            expected.probs().len()
        )));
    }
    let mut bins = Vec::with_capacity(observed.probs().len());
    let mut pass = true;
    for (r, (o, e)) in observed.probs().iter().zip(expected.probs()).enumerate() {
        let ok = o == e;
        pass &= ok;
        bins.push(BinDiagnostic {
            r: r as u64,
            observed: o.to_f64(),
            expected: e.to_f64(),
            sigmas: None,
            ok,
        });
    }
    Ok(CompareReport {
        pass,
        bins,
        chi_square: None,
    })
}

/// Statistical comparison of a simulation report against an expected PMF:
/// flags bins farther than three standard errors (`sqrt(p(1-p)/trials)`
/// with the expected `p`) and reports a chi-square statistic.
pub fn compare_stat(observed: &SimReport, expected: &Pmf<f64>) -> Result<CompareReport> {
    if observed.histogram().len() != expected.probs().len() {
        return Err(Error::SupportMismatch(format!(
            "observed has {} bins, expected has {}",
            observed.histogram().len(),
            expected.probs().len()
        )));
    }
    let trials = observed.trials() as f64;
    let mut bins = Vec::with_capacity(expected.probs().len());
    let mut pass = true;
    let mut chi = 0.0;
    for (r, (&count, &p)) in observed
        .histogram()
        .iter()
        .zip(expected.probs())
        .enumerate()
    {
        let p_hat = count as f64 / trials;
        let se = (p * (1.0 - p) / trials).sqrt();
        let (sigmas, ok) = if se == 0.0 {
            // Expected mass 0 or 1: the observation must match exactly.
            (None, p_hat == p)
        } else {
            let s = (p_hat - p) / se;
            (Some(s), s.abs() <= 3.0)
        };
        if p > 0.0 {
            let expect_count = p * trials;
            chi += (count as f64 - expect_count).powi(2) / expect_count;
        } else if count > 0 {
            pass = false;
        }
        pass &= ok;
        bins.push(BinDiagnostic {
            r: r as u64,
            observed: p_hat,
            expected: p,
            sigmas,
            ok,
        });
    }
    Ok(CompareReport {
        pass,
        bins,
        chi_square: Some(chi),
    })
}
