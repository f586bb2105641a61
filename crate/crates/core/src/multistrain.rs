//! Joint infection counts for several concurrent strains.
//!
//! Each day has a categorical outcome: no exposure (probability `beta_0`)
//! or exposure to strain `i` (probability `beta_i`); simultaneous exposures
//! are impossible by construction. Any infection opens an immunity window
//! that blocks every strain for that strain's `L_i` days.
//!
//! The joint distribution comes from the multivariate tiling recurrence
//! `g_n = beta_0 g_{n-1} + sum_i beta_i u_i g_{n-1-L_i}` combined with the
//! boundary numerator `1 + sum_i u_i beta_i (t + ... + t^{L_i})`. The
//! numerator convention is fixed by the single-day reduction
//! `pi_{e_i}(1) = beta_i`, which the enumeration oracle enforces.

use crate::dist::{support_max, Method, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{RationalGF, UPoly};

/// Default cap on the number of entries in a dense joint table.
pub const DEFAULT_TABLE_CAP: usize = 1 << 21;

/// One strain: daily exposure probability and immunity length (`>= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Strain<T> {
    pub beta: T,
    pub immunity: u64,
}

/// A set of `k >= 1` concurrent strains with `sum beta_i <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainSet<T> {
    strains: Vec<Strain<T>>,
}

impl<T: Scalar> StrainSet<T> {
    pub fn new(strains: Vec<(T, u64)>) -> Result<Self> {
        if strains.is_empty() {
            return Err(Error::InvalidParameter("need at least one strain".into()));
        }
        let mut total = T::zero();
        for (beta, immunity) in &strains {
            if *beta < T::zero() {
                return Err(Error::InvalidParameter("beta_i must be >= 0".into()));
            }
            if *immunity == 0 {
                return Err(Error::InvalidParameter("immunity_i must be >= 1".into()));
            }
            total = total + beta.clone();
        }
        if total > T::one() {
            return Err(Error::InvalidParameter(
                "sum of strain probabilities exceeds 1".into(),
            ));
        }
        Ok(Self {
            strains: strains
                .into_iter()
                .map(|(beta, immunity)| Strain { beta, immunity })
                .collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.strains.len()
    }

    pub fn strains(&self) -> &[Strain<T>] {
        &self.strains
    }

    /// Probability of no exposure on a given day, `1 - sum beta_i`.
    pub fn beta0(&self) -> T {
        self.strains
            .iter()
            .fold(T::one(), |acc, s| acc - s.beta.clone())
    }
}

/// Dense joint table over per-strain counts `(r_1, ..., r_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> JointPmf<T> {
    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<T>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    /// Per-axis table lengths (`support bound + 1` per strain).
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        for (i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(*i < d);
            off = off * d + i;
        }
        off
    }

    pub fn prob(&self, idx: &[usize]) -> T {
        if idx.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return T::zero();
        }
        self.data[self.offset(idx)].clone()
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, p| acc + p.clone())
    }

    /// Iterate `(index vector, probability)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &T)> + '_ {
        self.data.iter().enumerate().map(move |(off, p)| {
            let mut idx = vec![0; self.dims.len()];
            let mut rem = off;
            for a in (0..self.dims.len()).rev() {
                idx[a] = rem % self.dims[a];
                rem /= self.dims[a];
            }
            (idx, p)
        })
    }

    /// Distribution of the total count `r_1 + ... + r_k`.
    pub fn total_counts(&self) -> Pmf<T> {
        let r_max: usize = self.dims.iter().map(|d| d - 1).sum();
        let mut probs = vec![T::zero(); r_max + 1];
        for (idx, p) in self.iter() {
            let r: usize = idx.iter().sum();
            probs[r] = probs[r].clone() + p.clone();
        }
        Pmf::from_probs(probs, Method::Gf)
    }

    /// Marginal distribution of strain `axis`.
    pub fn marginal(&self, axis: usize) -> Pmf<T> {
        let mut probs = vec![T::zero(); self.dims[axis]];
        for (idx, p) in self.iter() {
            probs[idx[axis]] = probs[idx[axis]].clone() + p.clone();
        }
        Pmf::from_probs(probs, Method::Gf)
    }

    /// `P(r_i >= 1)` per strain; the larger one identifies the dominant
    /// strain.
    pub fn infection_probabilities(&self) -> Vec<T> {
        (0..self.dims.len())
            .map(|axis| {
                let m = self.marginal(axis);
                T::one() - m.prob(0)
            })
            .collect()
    }
}

/// Multivariate polynomial in the markers `u_1..u_k`, stored dense with the
/// same layout as the final table.
#[derive(Debug, Clone)]
struct MultiPoly<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> MultiPoly<T> {
    fn zero(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            data: vec![T::zero(); dims.iter().product()],
        }
    }

    fn constant(dims: &[usize], c: T) -> Self {
        let mut p = Self::zero(dims);
        p.data[0] = c;
        p
    }

    fn add_scaled(&mut self, other: &Self, w: &T) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + b.clone() * w.clone();
            }
        }
    }

    /// `self += w * u_axis * other`, dropping indices past the axis bound.
    fn add_scaled_shifted(&mut self, other: &Self, w: &T, axis: usize) {
        let stride: usize = self.dims[axis + 1..].iter().product();
        let axis_len = self.dims[axis];
        for (off, b) in other.data.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let pos = off / stride % axis_len;
            if pos + 1 >= axis_len {
                continue;
            }
            let target = off + stride;
            self.data[target] = self.data[target].clone() + b.clone() * w.clone();
        }
    }
}

/// Joint PMF of per-strain infection counts after `n` days.
///
/// The dense table is bounded per axis by `floor((n + L_i) / (L_i + 1))`;
/// its total size must stay within `cap` entries. Entries sum to exactly
/// one in rational mode; the `k = 1` table equals [`crate::pmf_direct`].
pub fn multi_pmf_with_cap<T: Scalar>(ss: &StrainSet<T>, n: u64, cap: usize) -> Result<JointPmf<T>> {
    let dims: Vec<usize> = ss
        .strains
        .iter()
        .map(|s| support_max(n.max(1), s.immunity) as usize + 1)
        .collect();
    let table: usize = dims.iter().product();
    if table > cap {
        return Err(Error::ResourceLimit(format!(
            "joint table would hold {table} entries (cap {cap})"
        )));
    }
    let beta0 = ss.beta0();
    let max_l = ss.strains.iter().map(|s| s.immunity).max().unwrap() as usize;

    // Tiling sequence g_0..g_n under the recurrence
    // g_m = beta0 g_{m-1} + sum_i beta_i u_i g_{m-1-L_i};
    // only the trailing max_l + 1 values are live.
    let mut window: Vec<MultiPoly<T>> = vec![MultiPoly::constant(&dims, T::one())];
    for m in 1..=n as usize {
        let mut next = MultiPoly::zero(&dims);
        next.add_scaled(&window[window.len() - 1], &beta0);
        for (axis, s) in ss.strains.iter().enumerate() {
            let back = s.immunity as usize + 1;
            if m >= back {
                let src = window.len() - back;
                next.add_scaled_shifted(&window[src], &s.beta, axis);
            }
        }
        window.push(next);
        if window.len() > max_l + 1 {
            window.remove(0);
        }
    }

    // Boundary numerator: g(final) = g_n + sum_i beta_i u_i
    // (g_{n-1} + ... + g_{n-L_i}).
    let mut table = window.last().unwrap().clone();
    for (axis, s) in ss.strains.iter().enumerate() {
        for d in 1..=s.immunity.min(n) as usize {
            let src = window.len() as i64 - 1 - d as i64;
            if src < 0 {
                break;
            }
            let poly = window[src as usize].clone();
            table.add_scaled_shifted(&poly, &s.beta, axis);
        }
    }
    Ok(JointPmf {
        dims: table.dims,
        data: table.data,
    })
}

/// [`multi_pmf_with_cap`] with the default table cap.
pub fn multi_pmf<T: Scalar>(ss: &StrainSet<T>, n: u64) -> Result<JointPmf<T>> {
    multi_pmf_with_cap(ss, n, DEFAULT_TABLE_CAP)
}

/// Probability that the total infection count `r_1 + ... + r_k` equals `r`.
pub fn total_count_pmf<T: Scalar>(ss: &StrainSet<T>, n: u64, r: u64) -> Result<T> {
    Ok(multi_pmf(ss, n)?.total_counts().prob(r))
}

/// Generating function of "exactly one infection of either type" for two
/// strains:
///
/// `P_1(t) = t (b1 + b2) (1 - x t - b1 t^{L1+1} - b2 t^{L2+1}) / ((1-t)(1 - x t)^2)`
///
/// with `x = 1 - b1 - b2`. Its `t^n` coefficient must equal
/// `total_count_pmf(ss, n, 1)`; the two routes share no code.
pub fn total_one_gf<T: Scalar>(ss: &StrainSet<T>) -> Result<RationalGF<T>> {
    if ss.k() != 2 {
        return Err(Error::Domain(format!(
            "the closed-form route needs exactly 2 strains (got {})",
            ss.k()
        )));
    }
    let b1 = ss.strains[0].beta.clone();
    let b2 = ss.strains[1].beta.clone();
    let l1 = ss.strains[0].immunity as usize;
    let l2 = ss.strains[1].immunity as usize;
    let x = ss.beta0();
    let b = b1.clone() + b2.clone();

    // num = b t - b x t^2 - b b1 t^{L1+2} - b b2 t^{L2+2}
    let mut num = vec![T::zero(); l1.max(l2) + 3];
    num[1] = num[1].clone() + b.clone();
    num[2] = num[2].clone() - b.clone() * x.clone();
    num[l1 + 2] = num[l1 + 2].clone() - b.clone() * b1;
    num[l2 + 2] = num[l2 + 2].clone() - b * b2;

    // den = (1 - t)(1 - x t)^2
    let sq = [T::one(), -(x.clone() + x.clone()), x.clone() * x.clone()];
    let mut den = vec![T::zero(); 4];
    for (i, c) in sq.iter().enumerate() {
        den[i] = den[i].clone() + c.clone();
        den[i + 1] = den[i + 1].clone() - c.clone();
    }
    Ok(RationalGF {
        num: num.into_iter().map(UPoly::constant).collect(),
        den: den.into_iter().map(UPoly::constant).collect(),
    })
}

/// Literal evaluation of the printed closed-form candidate for
/// `beta_0^{-1} pi_1(N, L_1 <= L_2)`, scaled back by `beta_0`.
///
/// The bracket carries `L_2 + 1` powers of `x = 1 - b_1 - b_2`:
///
/// - `x^0`: `(N - L_2)(1 - b_1)`
/// - `x^j` for `1 <= j <= L_2 - L_1 - 1`: `1 - (N - L_2 + 2 - j) b_1`
///   (coefficients descending from `N - L_2 + 1`, following the first two
///   printed terms)
/// - `x^j` for `L_2 - L_1 <= j <= L_2`: `1`
///
/// multiplied by `x^{N - L_2 - 1}`; for `N <= L_2` only the products with a
/// non-negative exponent survive (the top `N` terms). This display is a
/// verification target only — it is known to disagree with [`multi_pmf`]
/// over much of the domain, so compare and report rather than assert.
pub fn pi1_two_strain_explicit<T: Scalar>(n: u64, l1: u64, l2: u64, b1: T, b2: T) -> Result<T> {
    if l1 > l2 {
        return Err(Error::Domain(format!(
            "requires l1 <= l2 (got l1 = {l1}, l2 = {l2})"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("requires n >= 1".into()));
    }
    if b1 < T::zero() || b2 < T::zero() || b1.clone() + b2.clone() > T::one() {
        return Err(Error::InvalidParameter(
            "strain probabilities must be non-negative with sum <= 1".into(),
        ));
    }
    let x = T::one() - b1.clone() - b2;
    let nn = n as i64;
    let prefactor_exp = nn - l2 as i64 - 1;

    let mut acc = T::zero();
    for j in 0..=l2 {
        let exp = prefactor_exp + j as i64;
        if exp < 0 {
            continue; // below t^0: dropped ("top N terms" regime)
        }
        let mut coeff = T::zero();
        if j == 0 {
            coeff = coeff + T::from_u64(n.saturating_sub(l2)) * (T::one() - b1.clone());
        }
        if j >= 1 && l2 > l1 && j < l2 - l1 {
            let mult = nn - l2 as i64 + 2 - j as i64;
            coeff = coeff + T::one() - T::from_i64(mult) * b1.clone();
        }
        if j >= l2 - l1 {
            coeff = coeff + T::one();
        }
        acc = acc + coeff * x.powu(exp as u64);
    }
    // beta_0^{-1} pi_1 is what the bracket form expresses; undo it.
    Ok(x * acc)
}

/// One comparison row for the explicit-formula report.
#[derive(Debug, Clone)]
pub struct Pi1ComparisonRow {
    pub n: u64,
    pub l1: u64,
    pub l2: u64,
    pub b1: f64,
    pub b2: f64,
    pub explicit: f64,
    pub recurrence: f64,
}

impl Pi1ComparisonRow {
    pub fn discrepancy(&self) -> f64 {
        (self.explicit - self.recurrence).abs()
    }
}

/// Evaluate [`pi1_two_strain_explicit`] against the recurrence route over a
/// grid, returning per-point rows for reporting. Discrepancies are expected
/// and must be surfaced, not hidden.
pub fn pi1_comparison_report<T: Scalar>(
    grid: &[(u64, u64, u64, T, T)],
) -> Result<Vec<Pi1ComparisonRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    for (n, l1, l2, b1, b2) in grid {
        let explicit = pi1_two_strain_explicit(*n, *l1, *l2, b1.clone(), b2.clone())?;
        let ss = StrainSet::new(vec![(b1.clone(), *l1), (b2.clone(), *l2)])?;
        let recurrence = total_count_pmf(&ss, *n, 1)?;
        rows.push(Pi1ComparisonRow {
            n: *n,
            l1: *l1,
            l2: *l2,
            b1: b1.to_f64(),
            b2: b2.to_f64(),
            explicit: explicit.to_f64(),
            recurrence: recurrence.to_f64(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{pmf_direct, LatticeParams};
    use crate::series::series_of_rational;
    use crate::Exact;
    use num::bigint::BigInt;
    use num::rational::Ratio;

    fn br(n: i64, d: i64) -> Exact {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    fn two(b1: Exact, l1: u64, b2: Exact, l2: u64) -> StrainSet<Exact> {
        StrainSet::new(vec![(b1, l1), (b2, l2)]).unwrap()
    }

    #[test]
    fn strain_set_validation() {
        assert!(StrainSet::<Exact>::new(vec![]).is_err());
        assert!(StrainSet::new(vec![(br(1, 2), 0u64)]).is_err());
        assert!(StrainSet::new(vec![(br(2, 3), 1), (br(2, 3), 1)]).is_err());
        assert!(StrainSet::new(vec![(br(-1, 3), 1)]).is_err());
        let ss = two(br(1, 10), 3, br(1, 20), 5);
        assert_eq!(ss.beta0(), br(17, 20));
        assert_eq!(ss.k(), 2);
    }

    #[test]
    fn single_day_table() {
        let ss = two(br(1, 10), 3, br(1, 20), 5);
        let j = multi_pmf(&ss, 1).unwrap();
        assert_eq!(j.prob(&[0, 0]), br(17, 20));
        assert_eq!(j.prob(&[1, 0]), br(1, 10));
        assert_eq!(j.prob(&[0, 1]), br(1, 20));
        assert_eq!(j.sum(), br(1, 1));
    }

    #[test]
    fn one_strain_reduces_to_pmf_direct() {
        for l in [1u64, 2, 5] {
            for beta in [br(1, 7), br(1, 3), br(9, 10)] {
                for n in 1..=14u64 {
                    let ss = StrainSet::new(vec![(beta.clone(), l)]).unwrap();
                    let j = multi_pmf(&ss, n).unwrap();
                    let p = LatticeParams::new(n, l, beta.clone()).unwrap();
                    for r in 0..=p.support_max() {
                        assert_eq!(
                            j.prob(&[r as usize]),
                            pmf_direct(&p, r),
                            "n={n} l={l} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn equal_immunities_merge_to_one_strain() {
        // L1 = L2 = L: the total-count marginal equals the single-strain
        // distribution at beta = b1 + b2.
        let (b1, b2, l) = (br(1, 10), br(1, 20), 4u64);
        for n in 1..=16u64 {
            let ss = two(b1.clone(), l, b2.clone(), l);
            let totals = multi_pmf(&ss, n).unwrap().total_counts();
            let p = LatticeParams::new(n, l, b1.clone() + b2.clone()).unwrap();
            for r in 0..=p.support_max() {
                assert_eq!(totals.prob(r), pmf_direct(&p, r), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn vanishing_strain_degenerates() {
        let (b1, l1, l2) = (br(1, 6), 2u64, 7u64);
        for n in 1..=14u64 {
            let ss = two(b1.clone(), l1, br(0, 1), l2);
            let j = multi_pmf(&ss, n).unwrap();
            let p = LatticeParams::new(n, l1, b1.clone()).unwrap();
            // All mass on r_2 = 0, matching the single-strain law in r_1.
            for r in 0..=p.support_max() {
                assert_eq!(j.marginal(0).prob(r), pmf_direct(&p, r));
            }
            assert_eq!(j.marginal(1).prob(0), br(1, 1));
        }
    }

    #[test]
    fn joint_normalization_three_strains() {
        let ss = StrainSet::new(vec![(br(1, 10), 2), (br(1, 8), 3), (br(1, 5), 1)]).unwrap();
        for n in [1u64, 5, 12, 25, 60] {
            assert_eq!(multi_pmf(&ss, n).unwrap().sum(), br(1, 1), "n={n}");
        }
    }

    #[test]
    fn exchange_symmetry() {
        let a = two(br(1, 10), 3, br(1, 20), 5);
        let b = two(br(1, 20), 5, br(1, 10), 3);
        let ja = multi_pmf(&a, 11).unwrap();
        let jb = multi_pmf(&b, 11).unwrap();
        for (idx, p) in ja.iter() {
            let swapped = vec![idx[1], idx[0]];
            assert_eq!(*p, jb.prob(&swapped), "idx {idx:?}");
        }
    }

    #[test]
    fn total_one_gf_matches_recurrence() {
        let ss = two(br(1, 10), 3, br(1, 20), 5);
        let gf = total_one_gf(&ss).unwrap();
        let s = series_of_rational(&gf, 20, Some(0)).unwrap();
        for n in 1..=20u64 {
            assert_eq!(
                s.extract(n as usize, 0),
                total_count_pmf(&ss, n, 1).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn total_count_single_day() {
        let ss = two(br(1, 10), 3, br(1, 20), 5);
        assert_eq!(total_count_pmf(&ss, 1, 1).unwrap(), br(3, 20));
        let zero = two(br(0, 1), 3, br(0, 1), 5);
        assert_eq!(total_count_pmf(&zero, 9, 1).unwrap(), br(0, 1));
        assert_eq!(total_count_pmf(&zero, 9, 2).unwrap(), br(0, 1));
    }

    #[test]
    fn table_cap_enforced() {
        let ss = two(br(1, 10), 1, br(1, 20), 1);
        assert!(matches!(
            multi_pmf_with_cap(&ss, 40, 16),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn dominance_monotone_in_beta() {
        // P(r_i >= 1) grows with beta_i, everything else fixed.
        let mut prev = br(-1, 1);
        for num in 1..=8i64 {
            let ss = two(br(num, 20), 3, br(1, 20), 5);
            let probs = multi_pmf(&ss, 12).unwrap().infection_probabilities();
            assert!(probs[0] > prev);
            prev = probs[0].clone();
        }
        // And the strain with larger beta dominates at equal immunity.
        let ss = two(br(3, 20), 4, br(1, 20), 4);
        let probs = multi_pmf(&ss, 12).unwrap().infection_probabilities();
        assert!(probs[0] > probs[1]);
    }

    #[test]
    fn explicit_pi1_evaluates_and_errors() {
        assert!(pi1_two_strain_explicit(4, 5, 2, br(1, 10), br(1, 20)).is_err());
        assert!(pi1_two_strain_explicit(0, 1, 2, br(1, 10), br(1, 20)).is_err());
        assert!(pi1_two_strain_explicit(4, 1, 2, br(2, 3), br(2, 3)).is_err());
        // In-domain evaluation is finite and comparable; equality with the
        // recurrence is NOT asserted (the display is under question).
        let v = pi1_two_strain_explicit(6, 2, 3, br(1, 10), br(1, 20)).unwrap();
        assert!(v.to_f64().is_finite());
        // The N <= L_2 regime keeps only the top N terms and still evaluates.
        let v = pi1_two_strain_explicit(2, 1, 5, br(1, 10), br(1, 20)).unwrap();
        assert!(v.to_f64().is_finite());
    }

    #[test]
    fn comparison_report_runs() {
        let grid: Vec<(u64, u64, u64, Exact, Exact)> = vec![
            (2, 1, 1, br(1, 4), br(1, 4)),
            (6, 2, 3, br(1, 10), br(1, 20)),
            (10, 1, 4, br(1, 8), br(1, 8)),
        ];
        let rows = pi1_comparison_report(&grid).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert!(row.explicit.is_finite());
            assert!(row.recurrence >= 0.0 && row.recurrence <= 1.0);
        }
        // The N=2, L1=L2=1 point is the enumeration-checkable case: the
        // recurrence gives 1 - x^2, which the display does not reproduce.
        let first = &rows[0];
        assert!((first.recurrence - 0.75).abs() < 1e-12);
    }
}
