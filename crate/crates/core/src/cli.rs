//! Command-line front end.
//!
//! Exit codes: `0` success, `1` a check failed, `2` usage or input error,
//! `3` every check was indeterminate.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::coefficients::{c1_growth_table, synth, CouplingScheme, Hypothesis, Mode};
use crate::decoupling::{full, full_default, one_block, PolyFile};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_moment_sharded, estimate_tails, render_csv, stream_id_for, InputDistribution, ReportRow, SampleSpec,
};
use crate::polynomial::{random_poly, serialize, CubeEnumLimit, MultilinearPoly, DEFAULT_ENUM_CAP};
use crate::verify::{
    bounded_block, check_decoupled_tail, check_gaussian_dfko, check_hypercon, check_identity, check_moment_conditions,
    check_one_liner, check_supnorms, check_tail_domination, run_check, run_suite, scheme_for, CheckOptions,
    CheckResult, CheckStatus, SuiteReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "decouple-kit", version, about = "Decoupling of multilinear polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random multilinear polynomial.
    Gen(GenArgs),
    /// Decouple a polynomial file.
    Decouple(DecoupleArgs),
    /// Synthesize a coupling scheme.
    Synth(SynthArgs),
    /// Tabulate ‖c‖₁ growth for k = 1..kmax.
    CoeffTable(TableArgs),
    /// Estimate tail probabilities or moments by Monte Carlo.
    Estimate(EstimateArgs),
    /// Run verification checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct OutArg {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    homogeneous: bool,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("kind").required(true).args(["one_block", "full"])))]
struct DecoupleArgs {
    /// Polynomial JSON file.
    input: PathBuf,
    #[arg(long)]
    one_block: bool,
    #[arg(long)]
    full: bool,
    /// Block count for --full (defaults to the degree).
    #[arg(long, requires = "full")]
    k: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HypArg {
    H1,
    H2,
    H3,
}

impl From<HypArg> for Hypothesis {
    fn from(h: HypArg) -> Self {
        match h {
            HypArg::H1 => Hypothesis::H1,
            HypArg::H2 => Hypothesis::H2,
            HypArg::H3 => Hypothesis::H3,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Homogeneous,
    General,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Homogeneous => Mode::Homogeneous,
            ModeArg::General => Mode::General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, ignore_case = true)]
    hypothesis: HypArg,
    #[arg(long, value_enum, default_value = "homogeneous")]
    mode: ModeArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    kmax: usize,
    #[arg(long, value_enum, ignore_case = true, default_value = "h1")]
    hypothesis: HypArg,
    #[arg(long, value_enum, default_value = "homogeneous")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("quantity").required(true).args(["tail", "moment"])))]
struct EstimateArgs {
    /// Polynomial, one-block or full-decoupling JSON file.
    input: PathBuf,
    /// Thresholds t for Pr[|f| > t].
    #[arg(long, value_delimiter = ',')]
    tail: Vec<f64>,
    /// Even moment order p ∈ {2, 4, 6, 8}; reported as JSON.
    #[arg(long)]
    moment: Option<u32>,
    /// H1 samples Gaussian inputs, H2/H3 uniform ±1.
    #[arg(long, value_enum, ignore_case = true, default_value = "h1")]
    hypothesis: HypArg,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Master seed; drawn from the OS and reported when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Experiment label for the report.
    #[arg(long, default_value = "tail")]
    experiment: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").required(true).args(["check", "suite"])))]
struct VerifyArgs {
    /// Run the built-in cases of one check.
    #[arg(long)]
    check: Option<String>,
    /// Run every built-in check.
    #[arg(long)]
    suite: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Monte Carlo samples per estimated probability.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    enum_cap: usize,
    /// Check this polynomial or block file instead of the built-in cases.
    #[arg(long, requires = "check")]
    input: Option<PathBuf>,
    /// Scheme file for `identity` and `moment_conditions`.
    #[arg(long, requires = "check")]
    scheme: Option<PathBuf>,
    #[arg(long, value_enum, ignore_case = true)]
    hypothesis: Option<HypArg>,
    /// Thresholds for `tail_domination` and `gaussian_dfko`.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Threshold for `decoupled_tail` (defaults to σ).
    #[arg(long)]
    u: Option<f64>,
    /// Random points for `identity`.
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[command(flatten)]
    out: OutArg,
}

fn emit(out: &OutArg, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidArgument(format!("stdout: {e}"))),
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<i32> {
    check_positive("samples", args.samples)?;
    check_positive("shards", args.shards as u64)?;
    let file = PolyFile::parse(&read(&args.input)?)?;
    let poly: &MultilinearPoly = file.poly();
    let hypothesis = Hypothesis::from(args.hypothesis);
    let distribution = if hypothesis.is_boolean() {
        InputDistribution::Rademacher
    } else {
        InputDistribution::Gaussian
    };
    let seed = args.seed.unwrap_or_else(rand::random);
    let spec = SampleSpec::new(distribution, poly.n(), args.samples, seed, stream_id_for(&args.experiment))?;
    let eval = |x: &[f64]| poly.eval_unchecked(x);
    if let Some(p) = args.moment {
        let m = estimate_moment_sharded(eval, &spec, p, args.shards)?;
        let report = serde_json::json!({
            "experiment": args.experiment,
            "k": poly.degree(),
            "hypothesis": hypothesis,
            "p": m.p,
            "mean": m.mean,
            "std_error": m.std_error,
            "count": m.count,
            "seed": seed,
        });
        emit(&args.out, &serde_json::to_string_pretty(&report).expect("json"))?;
        return Ok(EXIT_OK);
    }
    let estimates = estimate_tails(eval, &spec, &args.tail, args.shards)?;
    let rows: Vec<ReportRow> = estimates
        .iter()
        .map(|e| ReportRow::from_estimate(&args.experiment, poly.degree(), &hypothesis.to_string(), e))
        .collect();
    let text = match args.format {
        Format::Csv => render_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&rows).expect("json"),
    };
    emit(&args.out, &text)?;
    Ok(EXIT_OK)
}

fn custom_check(name: &str, args: &VerifyArgs, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let missing = |what: &str| Error::InvalidArgument(format!("check {name} needs --{what}"));
    let input = || -> Result<PolyFile> {
        let path = args.input.as_ref().ok_or_else(|| missing("input"))?;
        PolyFile::parse(&read(path)?)
    };
    let plain = || -> Result<MultilinearPoly> {
        match input()? {
            PolyFile::Plain(p) => Ok(p),
            _ => Err(Error::InvalidArgument(format!("check {name} needs a plain polynomial file"))),
        }
    };
    let scheme = || -> Result<CouplingScheme> {
        let path = args.scheme.as_ref().ok_or_else(|| missing("scheme"))?;
        CouplingScheme::from_json(&read(path)?)
    };
    let hypothesis = || -> Result<Hypothesis> { Ok(args.hypothesis.ok_or_else(|| missing("hypothesis"))?.into()) };
    let thresholds = if args.t.is_empty() { vec![1.0] } else { args.t.clone() };
    let seed = args.seed;
    Ok(match name {
        "moment_conditions" => vec![check_moment_conditions(&scheme()?)],
        "identity" => {
            let f = plain()?;
            let s = match args.scheme {
                Some(_) => scheme()?,
                None => scheme_for(&f, hypothesis()?)?,
            };
            vec![check_identity(&f, &s, args.points, seed)?]
        }
        "hypercon" => vec![check_hypercon(&plain()?, opts.limit)?],
        "supnorms" => vec![check_supnorms(&plain()?, opts.limit)?],
        "one_liner" => {
            let block = match input()? {
                PolyFile::OneBlock(b) => b,
                PolyFile::Plain(p) => bounded_block(&p, opts.limit)?,
                PolyFile::Full(_) => return Err(Error::NotOneBlock("full decoupling file".into())),
            };
            vec![check_one_liner(&block, opts.limit)?]
        }
        "decoupled_tail" => {
            let block = match input()? {
                PolyFile::OneBlock(b) => b,
                PolyFile::Plain(p) => one_block(&p),
                PolyFile::Full(_) => return Err(Error::NotOneBlock("full decoupling file".into())),
            };
            let u = args.u.unwrap_or_else(|| block.derivative_weight().sqrt());
            vec![check_decoupled_tail(&block, u, seed, opts)?]
        }
        "tail_domination" => check_tail_domination(&plain()?, hypothesis()?, &thresholds, seed, opts)?,
        "gaussian_dfko" => {
            let f = plain()?;
            thresholds
                .iter()
                .map(|&t| check_gaussian_dfko(&f, t, seed, opts))
                .collect::<Result<_>>()?
        }
        _ => return run_check(name, seed, opts),
    })
}

fn verify(args: VerifyArgs) -> Result<i32> {
    check_positive("samples", args.samples)?;
    check_positive("shards", args.shards as u64)?;
    let opts = CheckOptions {
        count: args.samples,
        shards: args.shards,
        limit: CubeEnumLimit::new(args.enum_cap)?,
    };
    let report = match &args.check {
        Some(name) if args.input.is_some() || args.scheme.is_some() => {
            SuiteReport::new(args.seed, args.samples, custom_check(name, &args, &opts)?)
        }
        Some(name) => SuiteReport::new(args.seed, args.samples, run_check(name, args.seed, &opts)?),
        None => run_suite(args.seed, &opts)?,
    };
    emit(&args.out, &report.to_json())?;
    for c in report.checks.iter().filter(|c| c.status != CheckStatus::Pass) {
        eprintln!("{:?}: {} (lhs {}, rhs {})", c.status, c.name, c.lhs, c.rhs);
    }
    Ok(report.exit_code())
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(a) => {
            let p = random_poly(a.n, a.k, a.homogeneous, a.seed)?;
            emit(&a.out, &serialize(&p))?;
        }
        Command::Decouple(a) => {
            let file = PolyFile::parse(&read(&a.input)?)?;
            let poly = match file {
                PolyFile::Plain(p) => p,
                _ => return Err(Error::InvalidArgument("input is already decoupled".into())),
            };
            let text = if a.one_block {
                one_block(&poly).to_json()
            } else {
                match a.k {
                    Some(k) => full(&poly, k)?.to_json(),
                    None => full_default(&poly).to_json(),
                }
            };
            emit(&a.out, &text)?;
        }
        Command::Synth(a) => {
            let s = synth(a.k, a.hypothesis.into(), a.mode.into())?;
            emit(&a.out, &s.to_json_pretty())?;
        }
        Command::CoeffTable(a) => {
            let hypothesis: Hypothesis = a.hypothesis.into();
            let mode: Mode = a.mode.into();
            let rows = c1_growth_table(a.kmax, hypothesis, mode)?;
            let text = match a.format {
                Format::Json => serde_json::to_string_pretty(&rows).expect("json"),
                Format::Csv => {
                    let mut s = String::from("# decouple-kit v1\nk,hypothesis,mode,m,c1_norm,lambda_min,ratio,bound\n");
                    for r in &rows {
                        let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            r.k, hypothesis, mode, r.m, r.c1_norm, r.lambda_min, r.ratio, bound
                        ));
                    }
                    s
                }
            };
            emit(&a.out, &text)?;
            if rows.iter().any(|r| r.within_bound == Some(false)) {
                return Ok(EXIT_FAILED);
            }
        }
        Command::Estimate(a) => return estimate(a),
        Command::Verify(a) => return verify(a),
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
