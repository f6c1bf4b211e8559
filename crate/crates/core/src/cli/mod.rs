//! Command-line front end.
//!
//! Every command takes `--config FILE` (flat `key=value` lines named after
//! the long flags); flags given on the command line win. The worker count
//! comes from `TRICOK_WORKERS`.

mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::entrydist::EntryDist;
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate_chi0, estimate_hom_moment, EstimateResult};
use crate::json::{format_float, to_canonical};
use crate::modular::check_prime;
use crate::par::{with_workers, workers_from_env};
use crate::pgroup::{maximal_chain_count, Partition};
use crate::simulate::fit::compare;
use crate::simulate::{run_experiment, ExperimentConfig, FluctuationHistogram, ZetaPolicy};
use crate::theory::pmf::pmf_l1;
use crate::theory::{chi0_symmetric, TheoryParams};

#[derive(Parser, Debug)]
#[command(name = "tricok", version, about = "Cokernels of random lower triangular matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to json (plain decimal for `mc`).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Flat key=value file mirroring the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the d = 1 limit mass function.
    #[command(name = "theory-pmf", args_override_self = true)]
    TheoryPmf {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        chi: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmin: i64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: i64,
        #[command(flatten)]
        output: Output,
    },
    /// χ₀ in closed form (--alpha) or by estimation (--dist).
    #[command(args_override_self = true)]
    Chi0 {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "dist")]
        alpha: Option<f64>,
        #[arg(long)]
        dist: Option<String>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Estimator trials; with --alpha the estimate is skipped unless given.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Sample matrices and histogram the centered rank vector.
    #[command(args_override_self = true)]
    Simulate {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long)]
        seed: u64,
        /// `auto` or a value in [0, 1).
        #[arg(long, default_value = "auto")]
        zeta: String,
        /// Working precision E (default d + 8, lowered for large p).
        #[arg(long = "E", alias = "precision")]
        precision: Option<u32>,
        /// Budget in entry operations.
        #[arg(long)]
        budget: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Compare a histogram with the limit law.
    #[command(args_override_self = true)]
    Compare {
        #[arg(long)]
        hist: PathBuf,
        #[arg(long, conflicts_with = "alpha")]
        chi0: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Semicolon-separated partitions, e.g. "2,1;1,1".
        #[arg(long)]
        lambdas: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Rescaled moment E|Hom(Γ_n, G)| / n^ℓ against its limit.
    #[command(args_override_self = true)]
    Moments {
        #[arg(long)]
        p: u64,
        #[arg(long = "G")]
        g: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long)]
        seed: u64,
        /// Size and trials of the nested χ₀ estimate for laws without a closed form.
        #[arg(long, default_value_t = 1000)]
        chi0_n: usize,
        #[arg(long, default_value_t = 20000)]
        chi0_trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Number of maximal chains of subgroups of G_partition.
    #[command(args_override_self = true)]
    Mc {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        output: Output,
    },
    /// Run the brute-force oracle checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match with_workers(workers_from_env(), || run(cli.command)) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Splice `--key=value` pairs from `--config FILE` in front of the
/// explicit flags, so that the latter override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            let v = it.next().ok_or_else(|| Error::Validation("--config needs a file".into()))?;
            path = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    if rest.len() < 2 {
        return invalid("--config must follow a subcommand");
    }
    let text = std::fs::read_to_string(&path)?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        injected.push(OsString::from(format!("--{k}={v}")));
    }
    let mut out = rest[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[2..]);
    Ok(out)
}

impl Output {
    fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::TheoryPmf { p, chi, xmin, xmax, output } => cmd_theory_pmf(p, chi, xmin, xmax, &output),
        Command::Chi0 { p, alpha, dist, n, trials, seed, output } => cmd_chi0(p, alpha, dist, n, trials, seed, &output),
        Command::Simulate { p, d, n, trials, dist, seed, zeta, precision, budget, output } => {
            let dist = EntryDist::parse(&dist, p, 1.max(d))?;
            let mut cfg = ExperimentConfig::new(p, d, n, trials, ZetaPolicy::parse(&zeta)?, &dist, seed, precision)?;
            if let Some(b) = budget {
                cfg.budget = b;
            }
            let hist = run_experiment(&cfg)?;
            emit(&output, &hist.to_json()?)
        }
        Command::Compare { hist, chi0, alpha, lambdas, output } => cmd_compare(&hist, chi0, alpha, lambdas, &output),
        Command::Moments { p, g, n, trials, dist, seed, chi0_n, chi0_trials, output } => {
            cmd_moments(p, &g, n, trials, &dist, seed, chi0_n, chi0_trials, &output)
        }
        Command::Mc { p, partition, output } => {
            let lambda = Partition::parse(&partition)?;
            let mc = maximal_chain_count(&lambda, p)?;
            let text = match output.format {
                None | Some(Format::Csv) => format!("{mc}\n"),
                Some(Format::Json) => to_canonical(&json!({"p": p, "partition": lambda.parts(), "mc": mc.to_string()}))?,
            };
            emit(&output, &text)
        }
        Command::Selftest { seed } => {
            if selftest::run(seed) {
                Ok(())
            } else {
                Err(Error::Numerical("selftest failed".into()))
            }
        }
    }
}

fn cmd_theory_pmf(p: u64, chi: f64, xmin: i64, xmax: i64, output: &Output) -> Result<()> {
    check_prime(p)?;
    if xmin > xmax {
        return invalid(format!("xmin = {xmin} exceeds xmax = {xmax}"));
    }
    if xmax - xmin > 100_000 {
        return Err(Error::Resource("at most 100001 points per table".into()));
    }
    let mut rows = Vec::new();
    let mut cum = 0.0;
    for x in xmin..=xmax {
        let v = pmf_l1(p, chi, x)?;
        cum += v.value;
        rows.push((x, v, cum));
    }
    let text = match output.format() {
        Format::Csv => {
            let mut s = String::from("x,pmf,cumulative\n");
            for (x, v, c) in &rows {
                s.push_str(&format!("{x},{},{}\n", format_float(v.value), format_float(*c)));
            }
            s.push_str(&format!("sum,{},\n", format_float(cum)));
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(x, v, c)| {
                    json!({"x": x, "pmf": v.value, "cumulative": c, "error_bound": v.error_bound,
                           "underflow": v.underflow, "precision_bits": v.precision_bits})
                })
                .collect();
            to_canonical(&json!({"p": p, "chi": chi, "xmin": xmin, "xmax": xmax, "rows": rows, "sum": cum}))?
        }
    };
    emit(output, &text)
}

fn estimate_json(r: &EstimateResult) -> Value {
    json!({"n": r.n, "trials": r.trials, "estimate": r.estimate, "stderr": r.stderr, "diagnostics": r.diagnostics})
}

fn cmd_chi0(
    p: u64,
    alpha: Option<f64>,
    dist: Option<String>,
    n: usize,
    trials: Option<usize>,
    seed: Option<u64>,
    output: &Output,
) -> Result<()> {
    check_prime(p)?;
    let need_seed = || seed.ok_or_else(|| Error::Validation("--seed is required for estimates".into()));
    let mut report = json!({"p": p, "n": n});
    let mut csv = String::from("n,estimate,stderr,closed_form\n");
    match (alpha, dist) {
        (Some(a), None) => {
            let closed = chi0_symmetric(p, a)?;
            report["alpha"] = json!(a);
            report["closed_form"] = json!(closed.value);
            report["closed_form_error"] = json!(closed.error_bound);
            let mut est_cell = String::from(",");
            if let Some(t) = trials {
                let seed = need_seed()?;
                let r = estimate_chi0(&EntryDist::symmetric(p, a)?, n, t, seed)?;
                report["seed"] = json!(seed);
                report["trials"] = json!(t);
                report["z_score"] = json!((r.estimate - closed.value) / r.stderr.max(f64::MIN_POSITIVE));
                est_cell = format!("{},{}", format_float(r.estimate), format_float(r.stderr));
                report["estimate"] = estimate_json(&r);
            }
            csv.push_str(&format!("{n},{est_cell},{}\n", format_float(closed.value)));
        }
        (None, Some(spec)) => {
            let d = EntryDist::parse(&spec, p, 1)?;
            let seed = need_seed()?;
            let t = trials.unwrap_or(10_000);
            let mut table = Vec::new();
            for k in 0..3 {
                let r = estimate_chi0(&d, n << k, t, seed)?;
                csv.push_str(&format!("{},{},{},\n", n << k, format_float(r.estimate), format_float(r.stderr)));
                table.push(estimate_json(&r));
            }
            report["dist"] = json!(d.describe());
            report["seed"] = json!(seed);
            report["trials"] = json!(t);
            report["estimate"] = table[0].clone();
            report["convergence"] = Value::Array(table);
        }
        _ => return invalid("give exactly one of --alpha and --dist"),
    }
    let text = match output.format() {
        Format::Json => to_canonical(&report)?,
        Format::Csv => csv,
    };
    emit(output, &text)
}

fn parse_lambdas(s: &str) -> Result<Vec<Partition>> {
    s.split(';').map(Partition::parse).collect()
}

fn cmd_compare(
    path: &PathBuf,
    chi0: Option<f64>,
    alpha: Option<f64>,
    lambdas: Option<String>,
    output: &Output,
) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let hist = FluctuationHistogram::from_json(&text)?;
    let chi0 = match (chi0, alpha) {
        (Some(c), None) => c,
        (None, Some(a)) => chi0_symmetric(hist.p, a)?.value,
        _ => return invalid("give exactly one of --chi0 and --alpha"),
    };
    let params = TheoryParams::new(hist.p, hist.d, hist.zeta, chi0)?;
    let default = if hist.d == 1 { "1" } else { "1;1,1" };
    let lambdas = parse_lambdas(lambdas.as_deref().unwrap_or(default))?;
    let report = compare(&hist, &params, &lambdas)?;
    let text = match output.format() {
        Format::Json => to_canonical(&report)?,
        Format::Csv => report.to_csv(),
    };
    emit(output, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_moments(
    p: u64,
    g: &str,
    n: usize,
    trials: usize,
    dist: &str,
    seed: u64,
    chi0_n: usize,
    chi0_trials: usize,
    output: &Output,
) -> Result<()> {
    check_prime(p)?;
    let g = Partition::parse(g)?;
    let dist = EntryDist::parse(dist, p, g.largest().max(1))?;
    let r = estimate_hom_moment(&dist, &g, n, trials, seed)?;
    let mc = maximal_chain_count(&g, p)?;
    let mod_p = dist.reduce(1)?;
    let (chi0, chi0_source) = match mod_p.symmetric_alpha() {
        Some(a) => (chi0_symmetric(p, a)?.value, "closed_form"),
        None => (estimate_chi0(&mod_p, chi0_n, chi0_trials, seed)?.estimate, "estimate"),
    };
    let ell = g.size();
    let mc_f: f64 = mc.to_string().parse().unwrap_or(f64::INFINITY);
    let fact: f64 = (1..=ell).map(f64::from).product();
    let theory = chi0.powi(ell as i32) * mc_f / fact;
    let report = json!({
        "p": p, "G": g.parts(), "n": n, "trials": trials, "seed": seed, "dist": dist.describe(),
        "E": dist.precision(), "empirical": r.estimate, "stderr": r.stderr, "diagnostics": r.diagnostics,
        "theory": theory, "chi0": chi0, "chi0_source": chi0_source, "mc": mc.to_string(),
    });
    let text = match output.format() {
        Format::Json => to_canonical(&report)?,
        Format::Csv => format!(
            "empirical,stderr,theory,mc\n{},{},{},{mc}\n",
            format_float(r.estimate),
            format_float(r.stderr),
            format_float(theory)
        ),
    };
    emit(output, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("tricok").chain(args.iter().copied()))
    }

    #[test]
    fn validation_exit_codes() {
        assert_eq!(code(&["theory-pmf", "--p", "2", "--chi", "0.5", "--xmin", "3", "--xmax", "1"]), 2);
        assert_eq!(code(&["theory-pmf", "--p", "4", "--chi", "0.5", "--xmin", "0", "--xmax", "1"]), 2);
        assert_eq!(code(&["chi0", "--p", "2"]), 2);
        assert_eq!(code(&["chi0", "--p", "2", "--alpha", "0.5", "--dist", "uniform"]), 2);
        assert_eq!(code(&["mc", "--p", "2", "--partition", "1,2"]), 2);
        assert_eq!(code(&["simulate", "--p", "2", "--n", "8", "--trials", "2"]), 2);
    }

    #[test]
    fn resource_guard() {
        let args = ["simulate", "--p", "3", "--n", "1000", "--trials", "1000", "--seed", "1", "--budget", "10"];
        assert_eq!(code(&args), 4);
    }

    #[test]
    fn config_then_flags() {
        let dir = std::env::temp_dir().join(format!("tricok-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("run.cfg");
        let out = dir.join("h.json");
        std::fs::write(&cfg, "# test\np=2\nn=16\ntrials=50\nseed=3\nzeta=0\n").unwrap();
        let o = out.to_str().unwrap();
        assert_eq!(code(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "8", "--out", o]), 0);
        let h = FluctuationHistogram::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!((h.n, h.trials, h.seed, h.p), (8, 50, 3, 2));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
