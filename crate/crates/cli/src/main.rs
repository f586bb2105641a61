//! `hpois`: batch CLI over the hardcore-poisson library.
//!
//! Every subcommand emits machine-readable output (JSON or CSV) on stdout;
//! human-oriented metadata goes to stderr. Exit codes: 0 success, 1 failed
//! internal checks (selftest suites, simulation verdict), 2 usage errors
//! (from the parser), 3 infeasible or invalid parameters.

mod output;
mod selftest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hardcore_poisson::calibration::{calibrate, Observation};
use hardcore_poisson::multistrain::{multi_pmf, StrainSet};
use hardcore_poisson::oracles::{compare_stat, simulate, SimConfig};
use hardcore_poisson::{
    full_limit_pmf, full_pmf, limit_support, poisson_pmf, ContinuousParams, Error, Exact,
    LatticeParams, Method, Nu, NumericMode, Scalar,
};

use output::{csv_escape_free, Payload, Sink};

#[derive(Parser)]
#[command(
    name = "hpois",
    version,
    about = "Reinfection-count distributions under hardcore immunity windows",
    after_help = "The numeric mode defaults to float; a beta written as p/q implies exact \
                  mode, and the HPOIS_MODE environment variable (exact|float) overrides that \
                  default. --mode always wins."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice PMF of infection counts over a full cycle.
    Pmf(PmfArgs),
    /// Continuous-limit PMF for (alpha, nu).
    Limit(LimitArgs),
    /// Monte Carlo simulation compared against the exact PMF.
    Simulate(SimulateArgs),
    /// Recover (alpha, nu) from observed population fractions.
    Fit(FitArgs),
    /// Joint PMF for several concurrent strains.
    Multi(MultiArgs),
    /// Run the internal identity suites.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct PmfArgs {
    /// Cycle length in days (N).
    #[arg(long)]
    n: u64,
    /// Immunity window length in days (L).
    #[arg(long)]
    l: u64,
    /// Daily exposure probability; decimal or p/q.
    #[arg(long)]
    beta: String,
    /// Evaluation route.
    #[arg(long, default_value = "direct")]
    method: String,
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long, default_value = "json")]
    format: FormatArg,
    /// Write the data stream to a file instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Expected exposures per cycle (alpha > 0).
    #[arg(long)]
    alpha: f64,
    /// Immunity fraction nu in [0, 1]; decimal or p/q. nu = 0 is the
    /// classical Poisson regime.
    #[arg(long)]
    nu: String,
    #[arg(long, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    l: u64,
    #[arg(long)]
    beta: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; the histogram is identical for any value.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Observed fraction never infected.
    #[arg(long)]
    frac0: f64,
    /// Observed fraction infected exactly once.
    #[arg(long)]
    frac1: f64,
    /// Cycle length used to report the implied immunity length L.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct MultiArgs {
    /// Strain as beta:L (repeatable), e.g. --strain 1/10:3 --strain 0.05:5.
    #[arg(long = "strain", required = true)]
    strains: Vec<String>,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Minimal run: normalization and degeneration suites only.
    #[arg(long)]
    quick: bool,
    /// Include the exhaustive-enumeration suite.
    #[arg(long)]
    oracle: bool,
    /// Cap the grids at this cycle length.
    #[arg(long, default_value_t = 40)]
    max_n: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pmf(args) => cmd_pmf(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Multi(args) => cmd_multi(args),
        Command::Selftest(args) => return selftest::run(args.quick, args.oracle, args.max_n),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// Mode resolution: explicit flag, then HPOIS_MODE, then `p/q` literals
/// imply exact, then float.
fn resolve_mode(flag: Option<ModeArg>, beta_literals: &[&str]) -> Result<NumericMode, Error> {
    if let Some(m) = flag {
        return Ok(match m {
            ModeArg::Exact => NumericMode::Exact,
            ModeArg::Float => NumericMode::Float,
        });
    }
    match std::env::var("HPOIS_MODE") {
        Ok(v) if v.eq_ignore_ascii_case("exact") => return Ok(NumericMode::Exact),
        Ok(v) if v.eq_ignore_ascii_case("float") => return Ok(NumericMode::Float),
        Ok(v) => {
            return Err(Error::InvalidParameter(format!(
                "HPOIS_MODE must be exact or float, got `{v}`"
            )))
        }
        Err(_) => {}
    }
    if beta_literals.iter().any(|s| s.contains('/')) {
        return Ok(NumericMode::Exact);
    }
    Ok(NumericMode::Float)
}

fn format_sink(format: FormatArg, out: Option<std::path::PathBuf>) -> Sink {
    Sink::new(matches!(format, FormatArg::Json), out)
}

fn cmd_pmf(args: PmfArgs) -> Result<ExitCode, Error> {
    let method: Method = args.method.parse()?;
    let mode = resolve_mode(args.mode, &[&args.beta])?;
    let mut payload = match mode {
        NumericMode::Exact => {
            let beta = Exact::from_prob_literal(&args.beta)?;
            let params = LatticeParams::new(args.n, args.l, beta)?;
            pmf_payload(&params, method)?
        }
        NumericMode::Float => {
            let beta = f64::from_prob_literal(&args.beta)?;
            let params = LatticeParams::new(args.n, args.l, beta)?;
            pmf_payload(&params, method)?
        }
    };
    payload.params.insert("n".into(), args.n.into());
    payload.params.insert("l".into(), args.l.into());
    format_sink(args.format, args.out).emit(&payload)?;
    Ok(ExitCode::SUCCESS)
}

fn pmf_payload<T: Scalar>(params: &LatticeParams<T>, method: Method) -> Result<Payload, Error> {
    let pmf = full_pmf(params, method)?;
    let mut payload = Payload::new(method.name(), T::MODE.name());
    payload
        .params
        .insert("beta".into(), params.beta().render().into());
    for (r, p) in pmf.probs().iter().enumerate() {
        payload.push_row(vec![("r", (r as u64).into()), ("p", p.render().into())]);
    }
    payload.sum = Some(pmf.sum().render());
    payload.diagnostics = pmf.notes().to_vec();
    payload.csv_header = "r,p".into();
    Ok(payload)
}

fn cmd_limit(args: LimitArgs) -> Result<ExitCode, Error> {
    let nu = Nu::parse(&args.nu)?;
    let cp = ContinuousParams::new(args.alpha, nu)?;
    let mut payload = Payload::new("limit", "float");
    payload
        .params
        .insert("alpha".into(), args.alpha.render().into());
    payload.params.insert("nu".into(), nu.render().into());
    payload.csv_header = "r,p".into();

    if nu.is_zero() {
        // Classical regime: unbounded support, truncated at a 1e-12 tail.
        let mut cumulative = 0.0;
        let mut sum = 0.0;
        for r in 0..=200u64 {
            let p = poisson_pmf(args.alpha, r);
            payload.push_row(vec![("r", r.into()), ("p", p.render().into())]);
            cumulative += p;
            sum = cumulative;
            if 1.0 - cumulative < 1e-12 {
                break;
            }
        }
        payload.sum = Some(sum.render());
        payload
            .diagnostics
            .push("nu = 0: classical Poisson regime, support truncated at 1e-12 tail".into());
    } else {
        let support = limit_support(nu)?;
        payload
            .params
            .insert("r_flat".into(), support.r_flat.into());
        payload
            .params
            .insert("r_sharp".into(), support.r_sharp.into());
        let pmf = full_limit_pmf(&cp)?;
        for (r, p) in pmf.probs().iter().enumerate() {
            payload.push_row(vec![("r", (r as u64).into()), ("p", p.render().into())]);
        }
        payload.sum = Some(pmf.sum().render());
        if support.recip_integral {
            payload.diagnostics.push(format!(
                "1/nu is integral: the boundary mass at r = {} is exactly zero and omitted",
                support.r_sharp
            ));
        }
    }
    format_sink(args.format, args.out).emit(&payload)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let beta = f64::from_prob_literal(&args.beta)?;
    let params = LatticeParams::new(args.n, args.l, beta)?;
    let cfg = SimConfig::new(args.trials, args.seed)?.with_workers(args.workers)?;
    let report = simulate(&params, &cfg);
    let exact = full_pmf(&params, Method::Direct)?;
    let cmp = compare_stat(&report, &exact)?;

    let mut payload = Payload::new("simulate", "float");
    for (k, v) in [
        ("n", args.n),
        ("l", args.l),
        ("trials", args.trials),
        ("seed", args.seed),
    ] {
        payload.params.insert(k.into(), v.into());
    }
    payload
        .params
        .insert("workers".into(), (args.workers as u64).into());
    payload.params.insert("beta".into(), beta.render().into());
    payload.csv_header = "r,count,empirical,expected,std_err,sigmas".into();
    for (bin, &count) in cmp.bins.iter().zip(report.histogram()) {
        let se = (bin.expected * (1.0 - bin.expected) / args.trials as f64).sqrt();
        payload.push_row(vec![
            ("r", bin.r.into()),
            ("count", count.into()),
            ("empirical", bin.observed.render().into()),
            ("expected", bin.expected.render().into()),
            ("std_err", se.render().into()),
            ("sigmas", bin.sigmas.unwrap_or(0.0).render().into()),
        ]);
    }
    let verdict = if cmp.pass { "pass" } else { "fail" };
    payload.diagnostics.push(format!(
        "verdict: {verdict} (all bins within 3 standard errors required)"
    ));
    payload.diagnostics.push(format!(
        "chi_square: {}",
        cmp.chi_square.unwrap_or(f64::NAN).render()
    ));
    format_sink(args.format, args.out).emit(&payload)?;
    if cmp.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("simulation verdict: fail (bins {:?})", cmp.failed_bins());
        Ok(ExitCode::from(1))
    }
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode, Error> {
    let obs = Observation::new(args.frac0, args.frac1)?;
    let (alpha, nu) = calibrate(&obs)?;
    let mut payload = Payload::new("fit", "float");
    payload
        .params
        .insert("frac0".into(), args.frac0.render().into());
    payload
        .params
        .insert("frac1".into(), args.frac1.render().into());
    payload.csv_header = "key,value".into();
    payload.push_row(vec![
        ("key", "alpha".into()),
        ("value", alpha.render().into()),
    ]);
    payload.push_row(vec![("key", "nu".into()), ("value", nu.render().into())]);
    if let Some(n) = args.n {
        payload.params.insert("n".into(), n.into());
        let implied_l = (nu * n as f64).round() as u64;
        payload.push_row(vec![
            ("key", "implied_l".into()),
            ("value", implied_l.to_string().into()),
        ]);
    }
    format_sink(args.format, args.out).emit(&payload)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_strain(s: &str) -> Result<(String, u64), Error> {
    let (beta, l) = s.rsplit_once(':').ok_or_else(|| {
        Error::InvalidParameter(format!("strain `{s}` must be beta:L, e.g. 1/10:3"))
    })?;
    let l: u64 = l
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad immunity in strain `{s}`")))?;
    Ok((beta.to_string(), l))
}

fn cmd_multi(args: MultiArgs) -> Result<ExitCode, Error> {
    let parsed: Vec<(String, u64)> = args
        .strains
        .iter()
        .map(|s| parse_strain(s))
        .collect::<Result<_, _>>()?;
    let literals: Vec<&str> = parsed.iter().map(|(b, _)| b.as_str()).collect();
    let mode = resolve_mode(args.mode, &literals)?;
    let mut payload = match mode {
        NumericMode::Exact => multi_payload::<Exact>(&parsed, args.n)?,
        NumericMode::Float => multi_payload::<f64>(&parsed, args.n)?,
    };
    payload.params.insert("n".into(), args.n.into());
    payload
        .params
        .insert("strains".into(), args.strains.clone().into());
    format_sink(args.format, args.out).emit(&payload)?;
    Ok(ExitCode::SUCCESS)
}

fn multi_payload<T: Scalar>(parsed: &[(String, u64)], n: u64) -> Result<Payload, Error> {
    let strains: Vec<(T, u64)> = parsed
        .iter()
        .map(|(b, l)| Ok((T::from_prob_literal(b)?, *l)))
        .collect::<Result<_, Error>>()?;
    let ss = StrainSet::new(strains)?;
    let joint = multi_pmf(&ss, n)?;
    let mut payload = Payload::new("multi", T::MODE.name());
    payload
        .params
        .insert("beta0".into(), ss.beta0().render().into());
    let k = joint.dims().len();
    let mut header: Vec<String> = (1..=k).map(|i| format!("r{i}")).collect();
    header.push("p".into());
    payload.csv_header = header.join(",");
    for (idx, p) in joint.iter() {
        let mut row: Vec<(&str, serde_json::Value)> = vec![(
            "r",
            idx.iter().map(|&i| i as u64).collect::<Vec<u64>>().into(),
        )];
        row.push(("p", p.render().into()));
        payload.push_row_with_csv(
            row,
            idx.iter()
                .map(|i| i.to_string())
                .chain([csv_escape_free(p.render())])
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    payload.sum = Some(joint.sum().render());
    let infection = joint.infection_probabilities();
    for (i, p) in infection.iter().enumerate() {
        payload.diagnostics.push(format!(
            "strain {}: P(at least one infection) = {}",
            i + 1,
            p.render()
        ));
    }
    let dominant = infection
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i + 1)
        .unwrap_or(1);
    payload
        .diagnostics
        .push(format!("dominant strain: {dominant}"));
    Ok(payload)
}
