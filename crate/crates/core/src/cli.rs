//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure or a
//! numerical error, 2 on a usage error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{nth_root_trend, trend_csv, twist_ratio_trend, AsymProfile, TrendRow, DEFAULT_X0_TOLERANCE};
use crate::elimination::{
    certify, combined_form, convergence_csv, odd_indices, EliminationPlan, IntegerEntry,
};
use crate::error::Error;
use crate::forms::{coeffs_from_pfd, dual_check_with, HurwitzFormReport};
use crate::rational_fn::{decompose, CoefficientTable, FormSpec};
use crate::real::{digits_for, from_i64, to_decimal_string, to_f64, PrecisionContext, DEFAULT_BITS, DEFAULT_TOLERANCE};
use crate::verify::{run_suite, Failure, Mutation, Suite, SuiteSummary, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "zeta-forms", version, about = "Rational linear forms in Hurwitz and odd zeta values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Working precision in bits.
    #[arg(long, default_value_t = DEFAULT_BITS)]
    pub bits: usize,
    /// Target absolute error.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Write the document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long = "D")]
    pub d: u32,
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub n: u32,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub s: u32,
    /// Kept odd indices, comma separated.
    #[arg(long = "J", value_delimiter = ',', conflicts_with = "exclude")]
    pub keep: Option<Vec<u32>>,
    /// Odd indices to eliminate, comma separated; `J` is the rest.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Option<Vec<u32>>,
    /// The kept index `j` whose coefficient carries `det(M)`.
    #[arg(long)]
    pub target: u32,
    /// Values of `n`: a comma list, or an inclusive range `a..b`.
    #[arg(long, default_value = "2")]
    pub n: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact partial fractions of R.
    Decompose {
        #[command(flatten)]
        spec: SpecArgs,
        /// Run the lemma predicates and exit 1 if any fails.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// The exact lemma suite over a grid.
    Verify {
        #[arg(long = "max-D", default_value_t = 4)]
        max_d: u32,
        #[arg(long = "max-n", default_value_t = 4)]
        max_n: u32,
        /// Bound on |k| and |i| for Lemma 2.
        #[arg(long, default_value_t = 20)]
        max: i64,
        /// Suites to run, comma separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Corrupt the decompositions to exercise the failure path.
        #[arg(long, hide = true)]
        mutate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Both evaluations of the twisted forms.
    Evaluate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Twist; all of 1..=D when omitted.
        #[arg(long)]
        j: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// x1, x0, g(x0), the decay criterion and optional trend tables.
    Asymptotics {
        #[arg(long = "D")]
        d: u32,
        #[arg(long)]
        s: u32,
        /// Values of `n` for the trend tables.
        #[arg(long)]
        n: Option<String>,
        #[arg(long, default_value_t = 1)]
        j: u32,
        /// Second twist for the ratio table; defaults to D.
        #[arg(long)]
        jt: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// The elimination plan and exact integer forms.
    Eliminate {
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// The end-to-end certificate.
    Certify {
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        common: Common,
    },
}

/// A finished command: the document, a one-line summary and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub document: String,
    pub summary: String,
    pub code: i32,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Parses `2,4,6` or `20..30`.
pub fn parse_n_list(text: &str) -> crate::Result<Vec<u32>> {
    let bad = || usage(format!("cannot parse n list {text:?}"));
    let list: Vec<u32> = if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<crate::Result<_>>()?
    };
    if list.is_empty() || list.contains(&0) || list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage(format!("n list {text:?} must be increasing positive integers")));
    }
    Ok(list)
}

fn context(common: &Common) -> crate::Result<PrecisionContext> {
    PrecisionContext::new(common.bits, common.tol)
}

fn spec_of(args: &SpecArgs) -> crate::Result<FormSpec> {
    FormSpec::new(args.d, args.s, args.n)
}

fn plan_of(args: &PlanArgs) -> crate::Result<EliminationPlan> {
    match (&args.keep, &args.exclude) {
        (Some(keep), None) => EliminationPlan::new(args.m, args.s, keep, args.target),
        (None, Some(ex)) => EliminationPlan::dropping(args.m, args.s, ex, args.target),
        (None, None) if args.m == 0 => EliminationPlan::new(0, args.s, &odd_indices(args.s), args.target),
        _ => Err(usage("give either --J or --exclude")),
    }
}

fn require_json(common: &Common, what: &str) -> crate::Result<()> {
    if common.format == Format::Csv {
        return Err(usage(format!("{what} has no CSV form")));
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeDoc {
    table: CoefficientTable,
    max_coefficient_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<Vec<SuiteSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failures: Option<Vec<Failure>>,
}

fn cmd_decompose(spec: &SpecArgs, check: bool, common: &Common) -> crate::Result<Outcome> {
    require_json(common, "decompose")?;
    let spec = spec_of(spec)?;
    let pf = decompose(spec)?;
    let table = pf.to_table();
    let (checks, failures, code) = if check {
        let cfg = VerifyConfig {
            only: vec![Suite::Lemma3, Suite::Symmetry, Suite::Reflection, Suite::Residue, Suite::Lemma4, Suite::Lemma5],
            ..VerifyConfig::default()
        };
        let report = crate::verify::run_cell(spec, &cfg)?;
        let code = if report.passed() { EXIT_OK } else { EXIT_FAIL };
        (Some(report.suites), Some(report.failures), code)
    } else {
        (None, None, EXIT_OK)
    };
    let mut summary = format!("decomposed D={} s={} n={}: max coefficient {} bits", spec.d, spec.s, spec.n, pf.max_coefficient_bits());
    if let Some(ch) = &checks {
        for c in ch {
            let _ = write!(summary, "; {} {}/{}", c.suite.name(), c.checks - c.failures, c.checks);
        }
    }
    let doc = DecomposeDoc { table, max_coefficient_bits: pf.max_coefficient_bits(), checks, failures };
    Ok(Outcome { document: to_json(&doc), summary, code })
}

fn cmd_verify(cfg: VerifyConfig, common: &Common) -> crate::Result<Outcome> {
    require_json(common, "verify")?;
    let report = run_suite(&cfg)?;
    let mut summary = String::from("verify:");
    for s in &report.suites {
        let _ = write!(summary, " {} {}/{}", s.suite.name(), s.checks - s.failures, s.checks);
    }
    let code = if report.passed() { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome { document: to_json(&report), summary, code })
}

#[derive(Serialize)]
struct EvaluateEntry {
    form: HurwitzFormReport,
    series_value: String,
    series_error_bound: String,
    residual: String,
    passed: bool,
}

fn cmd_evaluate(spec: &SpecArgs, j: Option<u32>, common: &Common) -> crate::Result<Outcome> {
    require_json(common, "evaluate")?;
    let spec = spec_of(spec)?;
    let ctx = context(common)?;
    let pf = decompose(spec)?;
    let twists: Vec<u32> = match j {
        Some(j) => vec![j],
        None => (1..=spec.d).collect(),
    };
    let digits = digits_for(ctx.working_bits);
    let tol = crate::real::from_f64(ctx.target_abs_error, ctx.working_bits);
    let mut entries = Vec::new();
    let mut summary = format!("evaluate D={} s={} n={}:", spec.d, spec.s, spec.n);
    for j in twists {
        let form = coeffs_from_pfd(&pf, j)?;
        let check = dual_check_with(&pf, j, &ctx)?;
        let passed = check.residual <= &check.bound + &tol;
        let _ = write!(summary, " j={j} value {} residual {:.3e}", to_decimal_string(&check.form.value, 12), to_f64(&check.residual));
        entries.push(EvaluateEntry {
            form: HurwitzFormReport::new(&form, &check.form, ctx.working_bits),
            series_value: to_decimal_string(&check.series.value, digits),
            series_error_bound: to_decimal_string(&check.series.error, 6),
            residual: to_decimal_string(&check.residual, 6),
            passed,
        });
    }
    let code = if entries.iter().all(|e| e.passed) { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome { document: to_json(&entries), summary, code })
}

#[derive(Serialize)]
struct AsymptoticsDoc {
    #[serde(rename = "D")]
    d: u32,
    s: u32,
    x1: String,
    x0: String,
    f_at_x0_minus_one: String,
    g_at_x0: String,
    criterion_g_exp_s: f64,
    criterion_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    nth_root_trend: Option<Vec<TrendRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    twist_ratio_trend: Option<Vec<TrendRow>>,
}

fn cmd_asymptotics(d: u32, s: u32, n: Option<&str>, j: u32, jt: Option<u32>, common: &Common) -> crate::Result<Outcome> {
    let ctx = context(common)?;
    let bits = ctx.working_bits;
    let profile = AsymProfile::new(d, s, DEFAULT_X0_TOLERANCE, bits)?;
    let f = crate::asymptotics::f_d(&profile.x0, d, s)?;
    let n_list = n.map(parse_n_list).transpose()?;
    let jt = jt.unwrap_or(d);
    let (roots, ratios) = match &n_list {
        Some(list) => (Some(nth_root_trend(d, s, j, list, &ctx)?), Some(twist_ratio_trend(d, s, j, jt, list, &ctx)?)),
        None => (None, None),
    };
    let summary = format!(
        "asymptotics D={d} s={s}: x0 {} g(x0) {} g*e^s {:.6}",
        to_decimal_string(&profile.x0, 12),
        to_decimal_string(&profile.g_at_x0, 12),
        profile.criterion()
    );
    let document = match common.format {
        Format::Csv => {
            let (Some(roots), Some(ratios)) = (&roots, &ratios) else {
                return Err(usage("CSV output needs --n"));
            };
            let mut out = String::from("# nth root of r_n against g(x0)\n");
            out.push_str(&trend_csv(roots));
            out.push_str("# twist ratio\n");
            out.push_str(&trend_csv(ratios));
            out
        }
        Format::Json => to_json(&AsymptoticsDoc {
            d,
            s,
            x1: to_decimal_string(&profile.x1, 30),
            x0: to_decimal_string(&profile.x0, 30),
            f_at_x0_minus_one: to_decimal_string(&(f - from_i64(1, bits)), 6),
            g_at_x0: to_decimal_string(&profile.g_at_x0, 30),
            criterion_g_exp_s: profile.criterion(),
            criterion_met: profile.criterion() < 1.0,
            nth_root_trend: roots,
            twist_ratio_trend: ratios,
        }),
    };
    Ok(Outcome { document, summary, code: EXIT_OK })
}

#[derive(Serialize)]
struct ExactForm {
    n: u32,
    #[serde(rename = "A0")]
    a0: String,
    #[serde(rename = "A")]
    coeffs: Vec<IntegerEntry>,
    value: String,
    error_bound: String,
}

#[derive(Serialize)]
struct EliminateDoc {
    plan: EliminationPlan,
    forms: Vec<ExactForm>,
}

fn cmd_eliminate(args: &PlanArgs, common: &Common) -> crate::Result<Outcome> {
    require_json(common, "eliminate")?;
    let ctx = context(common)?;
    let plan = plan_of(args)?;
    let n_list = parse_n_list(&args.n)?;
    let digits = digits_for(ctx.working_bits).min(40);
    let mut forms = Vec::new();
    for &n in &n_list {
        let f = combined_form(&plan, n, &ctx)?;
        forms.push(ExactForm {
            n,
            a0: f.a0.to_string(),
            coeffs: f.coeffs.iter().map(|(i, c)| IntegerEntry { i: *i, value: c.to_string() }).collect(),
            value: to_decimal_string(&f.value.value, digits),
            error_bound: to_decimal_string(&f.value.error, 6),
        });
    }
    let summary = format!(
        "eliminate m={} s={} j={}: complement {:?}, det {}, positivity {}",
        plan.m, plan.s, plan.j, plan.complement, plan.det, plan.positivity
    );
    Ok(Outcome { document: to_json(&EliminateDoc { plan, forms }), summary, code: EXIT_OK })
}

fn cmd_certify(args: &PlanArgs, common: &Common) -> crate::Result<Outcome> {
    let ctx = context(common)?;
    let plan = plan_of(args)?;
    let n_list = parse_n_list(&args.n)?;
    let report = certify(plan.m, plan.s, &plan.keep, plan.j, &n_list, &ctx)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let summary = format!(
        "certify m={} s={} j={}: criterion {:.6} ({}), {} checks, {} failed{}",
        plan.m,
        plan.s,
        plan.j,
        report.criterion,
        if report.criterion_met { "met" } else { "not met at this s" },
        report.checks.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) }
    );
    let document = match common.format {
        Format::Json => to_json(&report),
        Format::Csv => convergence_csv(&report.convergence),
    };
    let code = if report.passed { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome { document, summary, code })
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Decompose { common, .. }
        | Command::Verify { common, .. }
        | Command::Evaluate { common, .. }
        | Command::Asymptotics { common, .. }
        | Command::Eliminate { common, .. }
        | Command::Certify { common, .. } => common,
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> crate::Result<Outcome> {
    match &cli.command {
        Command::Decompose { spec, check, common } => cmd_decompose(spec, *check, common),
        Command::Verify { max_d, max_n, max, only, mutate, common } => {
            let only = only.iter().map(|s| Suite::parse(s)).collect::<crate::Result<Vec<_>>>()?;
            if *max_d == 0 || *max_n == 0 || *max < 0 {
                return Err(usage("grid bounds must be positive"));
            }
            let mutation = if *mutate { Mutation::PerturbResidue } else { Mutation::None };
            cmd_verify(VerifyConfig { max_d: *max_d, max_n: *max_n, lemma2_max: *max, only, mutation }, common)
        }
        Command::Evaluate { spec, j, common } => cmd_evaluate(spec, *j, common),
        Command::Asymptotics { d, s, n, j, jt, common } => cmd_asymptotics(*d, *s, n.as_deref(), *j, *jt, common),
        Command::Eliminate { plan, common } => cmd_eliminate(plan, common),
        Command::Certify { plan, common } => cmd_certify(plan, common),
    }
}

/// Parses arguments, runs, writes output; returns the exit code.
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
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::InvalidArgument(_) | Error::InvalidSpec { .. } => EXIT_USAGE,
                _ => EXIT_FAIL,
            };
        }
    };
    match &common_of(&cli.command).out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.document) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_FAIL;
            }
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.document);
            eprintln!("{}", outcome.summary);
        }
    }
    outcome.code
}
