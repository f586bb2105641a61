//! Built-in identity suites: the same invariants the test suite enforces,
//! runnable from the installed binary.

use std::process::ExitCode;

use hardcore_poisson::multistrain::{multi_pmf, StrainSet};
use hardcore_poisson::oracles::{enumerate_exact_multi, enumerate_exact_with_cap};
use hardcore_poisson::series::{expand_closed_gf, tail_gf_coefficients};
use hardcore_poisson::{
    classical_pmf, full_limit_pmf, limit_pmf_term, pmf_closed, pmf_derivative, pmf_direct,
    support_max, ContinuousParams, Exact, LatticeParams, Method, Nu, Scalar,
};
use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::One;

fn br(n: i64, d: i64) -> Exact {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

const BETAS: [(i64, i64); 3] = [(1, 7), (1, 3), (9, 10)];
const LS: [u64; 6] = [0, 1, 2, 3, 5, 11];

type SuiteResult = Result<String, String>;
type Suite<'a> = (&'a str, Box<dyn Fn() -> SuiteResult>);

fn suite_normalization(max_n: u64) -> SuiteResult {
    let cap = max_n.min(40);
    for l in LS {
        for (bn, bd) in BETAS {
            for n in 1..=cap {
                let p = LatticeParams::new(n, l, br(bn, bd)).unwrap();
                let sum = hardcore_poisson::full_pmf(&p, Method::Direct)
                    .unwrap()
                    .sum();
                if !sum.is_one() {
                    return Err(format!("sum != 1 at n={n} l={l} beta={bn}/{bd}"));
                }
            }
        }
    }
    Ok(format!("exact sums to 1 up to n={cap}"))
}

fn suite_degenerations(max_n: u64) -> SuiteResult {
    let cap = max_n.min(24);
    for (bn, bd) in BETAS {
        for n in 1..=cap {
            let p = LatticeParams::new(n, 0, br(bn, bd)).unwrap();
            for r in 0..=n {
                if pmf_direct(&p, r) != classical_pmf(&p, r) {
                    return Err(format!("L=0 != binomial at n={n} r={r}"));
                }
            }
            let p = LatticeParams::new(n, n + 3, br(bn, bd)).unwrap();
            if support_max(n, n + 3) != 1 {
                return Err(format!("support_max(n={n}, l={}) != 1", n + 3));
            }
            let expect = Exact::one() - (Exact::one() - br(bn, bd)).powu(n);
            if pmf_direct(&p, 1) != expect {
                return Err(format!("L>N pi_1 mismatch at n={n}"));
            }
        }
    }
    Ok(format!("binomial and L>N regimes, up to n={cap}"))
}

fn suite_cross_method(max_n: u64) -> SuiteResult {
    let cap = max_n.min(24);
    let mut points = 0u64;
    for l in LS {
        for (bn, bd) in BETAS {
            let big = LatticeParams::new(cap, l, br(bn, bd)).unwrap();
            let series = expand_closed_gf(&big, cap as usize).map_err(|e| e.to_string())?;
            let r_hi = big.support_max() + 2;
            let tails: Vec<Vec<Exact>> = (0..=r_hi)
                .map(|r| tail_gf_coefficients(&big, cap as usize, r).unwrap())
                .collect();
            for n in 1..=cap {
                let p = LatticeParams::new(n, l, br(bn, bd)).unwrap();
                for r in 0..=p.support_max() {
                    let direct = pmf_direct(&p, r);
                    if r >= 1 && pmf_closed(&p, r) != direct {
                        return Err(format!("closed != direct at n={n} l={l} r={r}"));
                    }
                    if r >= 1 && l >= 1 && n > l * r && pmf_derivative(&p, r).unwrap() != direct {
                        return Err(format!("derivative != direct at n={n} l={l} r={r}"));
                    }
                    if series.extract(n as usize, r as usize) != direct {
                        return Err(format!("gf != direct at n={n} l={l} r={r}"));
                    }
                    let tele = tails[r as usize][n as usize].clone()
                        - tails[r as usize + 1][n as usize].clone();
                    if tele != direct {
                        return Err(format!("telescoped != direct at n={n} l={l} r={r}"));
                    }
                    points += 1;
                }
            }
        }
    }
    Ok(format!("{points} grid points, five routes agree exactly"))
}

fn suite_limit_normalization() -> SuiteResult {
    for alpha in [0.25, 0.693, 1.0, 2.0] {
        for nu in [
            Nu::Real(0.1),
            Nu::Real(0.15),
            Nu::Ratio(1, 3),
            Nu::Real(0.5),
            Nu::Real(1.0),
        ] {
            let cp = ContinuousParams::new(alpha, nu).unwrap();
            let sum = full_limit_pmf(&cp).unwrap().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(format!(
                    "limit sum {sum} at alpha={alpha} nu={}",
                    nu.value()
                ));
            }
        }
    }
    Ok("limit distribution sums to 1 within 1e-12".into())
}

fn suite_calibration() -> SuiteResult {
    for alpha in [0.3, 0.693, 1.0, 2.0] {
        for nu in [0.0, 0.1, 0.15, 0.5, 1.0] {
            let cp = ContinuousParams::new(alpha, Nu::Real(nu)).unwrap();
            let pi1 = limit_pmf_term(&cp, 1);
            let back = hardcore_poisson::calibration::estimate_nu(alpha, pi1)
                .map_err(|e| e.to_string())?;
            if (back - nu).abs() > 1e-8 {
                return Err(format!("round trip alpha={alpha} nu={nu} gave {back}"));
            }
        }
    }
    Ok("nu round trip within 1e-8".into())
}

fn suite_multistrain(max_n: u64) -> SuiteResult {
    let cap = max_n.min(12);
    for n in 1..=cap {
        let ss = StrainSet::new(vec![(br(1, 10), 3)]).unwrap();
        let joint = multi_pmf(&ss, n).map_err(|e| e.to_string())?;
        let p = LatticeParams::new(n, 3, br(1, 10)).unwrap();
        for r in 0..=p.support_max() {
            if joint.prob(&[r as usize]) != pmf_direct(&p, r) {
                return Err(format!("k=1 reduction differs at n={n} r={r}"));
            }
        }
        let ss = StrainSet::new(vec![(br(1, 10), 4), (br(1, 20), 4)]).unwrap();
        let totals = multi_pmf(&ss, n).map_err(|e| e.to_string())?.total_counts();
        let p = LatticeParams::new(n, 4, br(3, 20)).unwrap();
        for r in 0..=p.support_max() {
            if totals.prob(r) != pmf_direct(&p, r) {
                return Err(format!("equal-immunity merge differs at n={n} r={r}"));
            }
        }
    }
    Ok(format!("k=1 and equal-immunity reductions up to n={cap}"))
}

fn suite_oracle(max_n: u64) -> SuiteResult {
    let cap = max_n.min(12);
    for l in LS {
        for (bn, bd) in BETAS {
            for n in 1..=cap {
                let p = LatticeParams::new(n, l, br(bn, bd)).unwrap();
                let e = enumerate_exact_with_cap(&p, n, 1 << 14).map_err(|x| x.to_string())?;
                for r in 0..=p.support_max() {
                    if e.prob(r) != pmf_direct(&p, r) {
                        return Err(format!("enumeration != direct at n={n} l={l} r={r}"));
                    }
                }
            }
        }
    }
    let joint_cap = cap.min(8);
    let ss = StrainSet::new(vec![(br(1, 10), 2), (br(1, 20), 3)]).unwrap();
    for n in 1..=joint_cap {
        let e = enumerate_exact_multi(&ss, n, 1 << 20).map_err(|x| x.to_string())?;
        let m = multi_pmf(&ss, n).map_err(|x| x.to_string())?;
        if e != m {
            return Err(format!("joint enumeration != recurrence at n={n}"));
        }
    }
    Ok(format!(
        "enumeration agrees exactly up to n={cap} (joint up to n={joint_cap})"
    ))
}

pub fn run(quick: bool, oracle: bool, max_n: u64) -> ExitCode {
    let mut suites: Vec<Suite> = vec![
        (
            "normalization",
            Box::new(move || suite_normalization(max_n)),
        ),
        (
            "degenerations",
            Box::new(move || suite_degenerations(max_n)),
        ),
        ("limit-normalization", Box::new(suite_limit_normalization)),
    ];
    if !quick {
        suites.push(("cross-method", Box::new(move || suite_cross_method(max_n))));
        suites.push(("calibration", Box::new(suite_calibration)));
        suites.push(("multistrain", Box::new(move || suite_multistrain(max_n))));
    }
    if oracle {
        suites.push(("oracle-enumeration", Box::new(move || suite_oracle(max_n))));
    }

    let mut failed = 0;
    for (name, suite) in suites {
        match suite() {
            Ok(detail) => println!("suite {name}: PASS ({detail})"),
            Err(why) => {
                println!("suite {name}: FAIL ({why})");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("selftest: {failed} suite(s) failed");
        ExitCode::from(1)
    } else {
        println!("selftest: all suites passed");
        ExitCode::SUCCESS
    }
}
