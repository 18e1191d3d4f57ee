//! Command-line front end.
//!
//! Every command is deterministic in its flags. CSV output starts with a
//! `# schema_version=1` comment line and JSON output carries a
//! `schema_version` field.
//!
//! Exit codes: 0 success, 1 domain error, 2 resource guard, 64 usage.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distribution::{
    capture_probability_d01, deviation_mass, oracle_distribution, peaks, per_k_distribution,
    two_term_distribution, OrderInfo, OutputDistribution, PeakModel, ProblemInstance,
};
use crate::error::Error;
use crate::experiments::{
    capture_rate_empirical, census_sweep, figure_data, neighbor_state_check, odd_semiprimes_below,
    summarize_census, valuation_model_mc, FailureCensus, DEFAULT_CENSUS_LIMIT, FIGURE1,
};
use crate::number_theory::Natural;
use crate::pipeline::{
    order_recovery_guarantee, run_once, run_with_retries, RetryPolicy, RunOutcome, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "shor-sim",
    version,
    about = "Measurement statistics of Shor order finding"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Oracle,
    PerK,
    TwoTerm,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub n: Natural,
    #[arg(long)]
    pub x: Natural,
    /// Register-A size; defaults to ceil(2 log2 n).
    #[arg(long)]
    pub qa: Option<u32>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact output distribution P(c).
    Dist {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::TwoTerm)]
        method: MethodArg,
    },
    /// Peak table (nu, sigma_nu, c_nu, delta_nu).
    Peaks {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// One simulated factoring run.
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Apply multiplier trials and resampling on failure.
        #[arg(long)]
        retry: bool,
        #[arg(long, default_value_t = RetryPolicy::default().max_mu)]
        max_mu: Natural,
        #[arg(long, default_value_t = RetryPolicy::default().max_resamples)]
        max_resamples: usize,
    },
    /// Failure census over odd semiprimes with distinct factors.
    Census {
        /// Exclusive upper limit of the sweep.
        #[arg(long, default_value_t = DEFAULT_CENSUS_LIMIT)]
        nmax: Natural,
        /// Explicit list of n, overriding --nmax.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<Natural>,
    },
    /// Monte Carlo of the 2-adic valuation model.
    McValuation {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Capture probability for d in {0, 1}: quadrature, or an instance when --n/--x are given.
    Capture {
        #[arg(long, requires = "x")]
        n: Option<Natural>,
        #[arg(long, requires = "n")]
        x: Option<Natural>,
        #[arg(long)]
        qa: Option<u32>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Distribution and peak table of the n = 21, x = 10, q_A = 8 instance.
    Fig1,
    /// Continued-fraction correctness margin of an instance.
    Guarantee {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Whether states next to a peak change the recovered fraction.
    Neighbors {
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

/// Failure of a parsed CLI invocation. Parse failures never get this far;
/// they exit with [`EXIT_USAGE`].
#[derive(Debug)]
pub enum CliError {
    Run(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(Error::Resource(_)) => EXIT_RESOURCE,
            CliError::Run(_) | CliError::Io(_) => EXIT_DOMAIN,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Decimal rendering with at least 12 significant digits (17 for values
/// away from zero, enough to round-trip).
pub fn fmt_decimal(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.12}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(12, 340) as usize;
    format!("{v:.decimals$}")
}

fn csv_header(out: &mut String, columns: &str) {
    writeln!(out, "# schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(out, "{columns}").unwrap();
}

pub fn distribution_csv(dist: &OutputDistribution) -> String {
    let mut out = String::new();
    csv_header(&mut out, "c,P(c)");
    for (c, p) in dist.probabilities().iter().enumerate() {
        writeln!(out, "{c},{}", fmt_decimal(*p)).unwrap();
    }
    out
}

pub fn peaks_csv(peaks: &[PeakModel]) -> String {
    let mut out = String::new();
    csv_header(&mut out, "nu,sigma_nu,c_nu,delta_nu");
    for p in peaks {
        writeln!(
            out,
            "{},{},{},{}",
            p.nu,
            fmt_decimal(p.sigma_nu),
            p.c_nu,
            fmt_decimal(p.delta_nu)
        )
        .unwrap();
    }
    out
}

pub fn census_csv(rows: &[FailureCensus]) -> String {
    let mut out = String::new();
    csv_header(&mut out, "n,p1,p2,num_x,odd_r,trivial_sqrt,bad_fraction");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.p1,
            r.p2,
            r.num_x,
            r.odd_r,
            r.trivial_sqrt,
            fmt_decimal(r.fraction_bad)
        )
        .unwrap();
    }
    out
}

fn run_csv(outcome: &RunOutcome) -> String {
    let rec = outcome.record();
    let opt = |v: Option<Natural>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::new();
    csv_header(
        &mut out,
        "n,x,qA,N,r_true,c,recovered_num,recovered_den,classification,factors,retries",
    );
    let factors = rec
        .factors
        .map(|[p, q]| format!("{p} {q}"))
        .unwrap_or_default();
    let class = serde_json::to_value(rec.classification).expect("enum serializes");
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        rec.n,
        rec.x,
        rec.qa,
        rec.big_n,
        opt(rec.r_true),
        opt(rec.c),
        opt(rec.recovered_num),
        opt(rec.recovered_den),
        class.as_str().unwrap_or_default(),
        factors,
        rec.retries.len()
    )
    .unwrap();
    out
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

/// Flat key/value CSV for single-record outputs.
fn record_csv<T: Serialize>(value: &T) -> String {
    let serde_json::Value::Object(map) =
        serde_json::to_value(value).expect("output types serialize")
    else {
        unreachable!("records serialize to objects")
    };
    let render = |v: &serde_json::Value| match v {
        serde_json::Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => fmt_decimal(f),
            _ => n.to_string(),
        },
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string().replace(',', " "),
    };
    let mut out = String::new();
    let keys: Vec<&str> = map
        .keys()
        .map(String::as_str)
        .filter(|k| *k != "schema_version")
        .collect();
    csv_header(&mut out, &keys.join(","));
    let values: Vec<String> = keys.iter().map(|k| render(&map[*k])).collect();
    writeln!(out, "{}", values.join(",")).unwrap();
    out
}

fn instance_of(args: &InstanceArgs) -> Result<ProblemInstance, Error> {
    ProblemInstance::build(args.n, args.x, args.qa)
}

#[derive(Serialize)]
struct DistributionJson<'a> {
    schema_version: u32,
    #[serde(flatten)]
    instance: &'a ProblemInstance,
    r: Natural,
    method: crate::distribution::Method,
    probabilities: &'a [f64],
}

#[derive(Serialize)]
struct PeaksJson<'a> {
    schema_version: u32,
    #[serde(flatten)]
    instance: &'a ProblemInstance,
    r: Natural,
    peaks: &'a [PeakModel],
}

#[derive(Serialize)]
struct FigureJson<'a> {
    schema_version: u32,
    #[serde(flatten)]
    instance: &'a ProblemInstance,
    r: Natural,
    probabilities: &'a [f64],
    peaks: &'a [PeakModel],
}

#[derive(Serialize)]
struct CensusJson<'a> {
    #[serde(flatten)]
    summary: crate::experiments::CensusSummary,
    rows: &'a [FailureCensus],
}

#[derive(Serialize)]
struct QuadratureJson {
    schema_version: u32,
    capture_probability: f64,
    mass_d0: f64,
    mass_d1: f64,
}

/// Runs one parsed command and returns the rendered output.
pub fn render(config: &CliConfig) -> Result<String, Error> {
    let format = config.format;
    let seed = config.seed;
    let fmt_or = |default: Format| format.unwrap_or(default);
    Ok(match &config.command {
        Command::Dist { instance, method } => {
            let inst = instance_of(instance)?;
            let ord = OrderInfo::for_instance(&inst)?;
            let dist = match method {
                MethodArg::Oracle => oracle_distribution(&inst)?,
                MethodArg::PerK => per_k_distribution(&inst, &ord)?,
                MethodArg::TwoTerm => two_term_distribution(&inst, &ord)?,
            };
            match fmt_or(Format::Csv) {
                Format::Csv => distribution_csv(&dist),
                Format::Json => json(&DistributionJson {
                    schema_version: SCHEMA_VERSION,
                    instance: &inst,
                    r: ord.r,
                    method: dist.method(),
                    probabilities: dist.probabilities(),
                }),
            }
        }
        Command::Peaks { instance } => {
            let inst = instance_of(instance)?;
            let ord = OrderInfo::for_instance(&inst)?;
            let peaks = peaks(&inst, &ord);
            match fmt_or(Format::Csv) {
                Format::Csv => peaks_csv(&peaks),
                Format::Json => json(&PeaksJson {
                    schema_version: SCHEMA_VERSION,
                    instance: &inst,
                    r: ord.r,
                    peaks: &peaks,
                }),
            }
        }
        Command::Run {
            instance,
            retry,
            max_mu,
            max_resamples,
        } => {
            let outcome = if *retry {
                let policy = RetryPolicy {
                    max_mu: *max_mu,
                    max_resamples: *max_resamples,
                };
                run_with_retries(instance.n, instance.x, instance.qa, policy, seed)?
            } else {
                run_once(instance.n, instance.x, instance.qa, seed)?
            };
            match fmt_or(Format::Json) {
                Format::Csv => run_csv(&outcome),
                Format::Json => json(&outcome.record()),
            }
        }
        Command::Census { nmax, n_list } => {
            let ns = if n_list.is_empty() {
                odd_semiprimes_below(*nmax)
            } else {
                n_list.clone()
            };
            let rows = census_sweep(&ns)?;
            match fmt_or(Format::Csv) {
                Format::Csv => census_csv(&rows),
                Format::Json => json(&CensusJson {
                    summary: summarize_census(&rows)?,
                    rows: &rows,
                }),
            }
        }
        Command::McValuation { trials } => {
            let result = valuation_model_mc(*trials, seed)?;
            match fmt_or(Format::Json) {
                Format::Csv => record_csv(&result),
                Format::Json => json(&result),
            }
        }
        Command::Capture { n, x, qa, samples } => match (n, x) {
            (Some(n), Some(x)) => {
                let qa = qa.unwrap_or_else(|| crate::distribution::default_register_qubits(*n));
                let rate = capture_rate_empirical(*n, *x, qa, *samples, seed)?;
                match fmt_or(Format::Json) {
                    Format::Csv => record_csv(&rate),
                    Format::Json => json(&rate),
                }
            }
            _ => {
                let q = QuadratureJson {
                    schema_version: SCHEMA_VERSION,
                    capture_probability: capture_probability_d01(),
                    mass_d0: deviation_mass(0),
                    mass_d1: deviation_mass(1),
                };
                match fmt_or(Format::Json) {
                    Format::Csv => record_csv(&q),
                    Format::Json => json(&q),
                }
            }
        },
        Command::Fig1 => {
            let (n, x, qa) = FIGURE1;
            let fig = figure_data(n, x, qa)?;
            match fmt_or(Format::Csv) {
                Format::Csv => {
                    let mut out = distribution_csv(&fig.distribution);
                    out.push_str("# peaks\n");
                    out.push_str(
                        peaks_csv(&fig.peaks)
                            .lines()
                            .skip(1)
                            .map(|l| format!("{l}\n"))
                            .collect::<String>()
                            .as_str(),
                    );
                    out
                }
                Format::Json => json(&FigureJson {
                    schema_version: SCHEMA_VERSION,
                    instance: &fig.instance,
                    r: fig.order.r,
                    probabilities: fig.distribution.probabilities(),
                    peaks: &fig.peaks,
                }),
            }
        }
        Command::Guarantee { instance } => {
            let report = order_recovery_guarantee(&instance_of(instance)?)?;
            match fmt_or(Format::Json) {
                Format::Csv => record_csv(&report),
                Format::Json => json(&report),
            }
        }
        Command::Neighbors { instance } => {
            let qa = instance
                .qa
                .unwrap_or_else(|| crate::distribution::default_register_qubits(instance.n));
            let report = neighbor_state_check(instance.n, instance.x, qa)?;
            match fmt_or(Format::Json) {
                Format::Csv => record_csv(&report),
                Format::Json => json(&report),
            }
        }
    })
}

/// Routes a parsed configuration and writes its output.
pub fn dispatch(config: &CliConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = render(config)?;
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&config, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = match &e {
                CliError::Run(err) => err.to_string(),
                CliError::Io(err) => format!("i/o error: {err}"),
            };
            let _ = writeln!(stderr, "shor-sim: {msg}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("shor-sim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn decimal_format_keeps_digits() {
        assert_eq!(fmt_decimal(0.0), "0.000000000000");
        assert_eq!(fmt_decimal(0.5), "0.50000000000000000");
        let tiny = fmt_decimal(1.234_567_890_123_456e-9);
        assert!(!tiny.contains('e'));
        assert_eq!(tiny.parse::<f64>().unwrap(), 1.234_567_890_123_456e-9);
    }

    #[test]
    fn unknown_command_is_usage_error() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["dist", "--n", "abc", "--x", "2"]).0, EXIT_USAGE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn domain_and_resource_exit_codes() {
        let (code, _, err) = run(&["dist", "--n", "21", "--x", "7"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.contains("no multiplicative order"));
        assert_eq!(run(&["run", "--n", "25", "--x", "2"]).0, EXIT_DOMAIN);
        assert_eq!(
            run(&["dist", "--n", "21", "--x", "10", "--qa", "25"]).0,
            EXIT_RESOURCE
        );
        assert_eq!(run(&["mc-valuation", "--trials", "10"]).0, EXIT_DOMAIN);
    }

    #[test]
    fn run_shortcut_json() {
        let (code, out, _) = run(&["run", "--n", "21", "--x", "7"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["classification"], "CommonFactorShortcut");
        assert_eq!(v["factors"], serde_json::json!([7, 3]));
        assert_eq!(v["schema_version"], 1);
    }
}
