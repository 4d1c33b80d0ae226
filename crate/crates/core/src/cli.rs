//! Command-line front end.
//!
//! Every sub-command writes a single report (JSON by default) to standard
//! output. Exit codes: 0 for a decisive verdict or a successful
//! simulation/evaluation, 2 for an inconclusive verdict, 1 for any error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bdp::{bdp_classify, BirthDeathRates, Classification, Recurrence};
use crate::convergence::{adaptive_classify, ClassifyConfig, Decision, RatioSpec, Verdict};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::family::SeriesFamily;
use crate::iterlog::{self, index_to_real, Level, K_MAX_NUMERIC};
use crate::real::{Dd, Real};
use crate::rwalk::{rw_classify, simulate, DriftSpec};
use crate::table::{Columns, Table};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_DECISIVE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "bdm",
    version,
    about = "Convergence tests for positive series and recurrence of birth-death chains and random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a positive series as convergent or divergent.
    ClassifySeries(SeriesArgs),
    /// Classify a birth-and-death chain as recurrent or transient.
    ClassifyBdp(BdpArgs),
    /// Classify a reflected random walk with drift alpha_n/n.
    ClassifyWalk(WalkArgs),
    /// Monte Carlo simulation of a reflected random walk.
    SimulateWalk(SimulateArgs),
    /// Evaluate ln_(K) n and the level-K weight n ln n ... ln_(K) n.
    EvalIterlog(IterlogArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Precision {
    /// Double-double arithmetic (about 32 significant digits).
    Extended,
    /// IEEE double precision.
    Native,
}

/// Accepts plain integers as well as forms like `1e7`.
fn parse_index(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v >= 0.0 && v <= iterlog::MAX_EXACT_INDEX as f64 => {
            Ok(v as u64)
        }
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

#[derive(Args, Debug, Clone)]
struct ClassifyOpts {
    /// Level at which the test starts.
    #[arg(long = "K", default_value_t = 1)]
    k: u32,
    /// Deepest level the test may escalate to.
    #[arg(long = "K-max", default_value_t = K_MAX_NUMERIC)]
    k_max: u32,
    /// Distance from the critical value required for a decisive verdict.
    #[arg(long, default_value_t = crate::convergence::DEFAULT_MARGIN)]
    margin: f64,
    /// Lower end of the sampling window (raised to the level's domain).
    #[arg(long = "window-lo", default_value = "100", value_parser = parse_index)]
    window_lo: u64,
    /// Upper end of the sampling window.
    #[arg(long = "window-hi", default_value = "1e7", value_parser = parse_index)]
    window_hi: u64,
    #[arg(long, value_enum, default_value_t = Precision::Extended)]
    precision: Precision,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl ClassifyOpts {
    fn config(&self) -> ClassifyConfig {
        ClassifyConfig {
            k_start: self.k,
            k_max: self.k_max,
            window_lo: self.window_lo,
            window_hi: self.window_hi,
            margin: self.margin,
            ..ClassifyConfig::default()
        }
    }
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["family", "expr", "delta_expr", "table"]))]
struct SeriesArgs {
    /// Builtin family.
    #[arg(long, value_parser = ["p-series", "log-power", "iterlog-power", "geometric"])]
    family: Option<String>,
    /// Expression for the term a_n.
    #[arg(long)]
    expr: Option<String>,
    /// Expression for a_n/a_(n+1) - 1.
    #[arg(long = "delta-expr")]
    delta_expr: Option<String>,
    /// Two-column data file.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Column layout of --table: term (n, a_n) or ratio (n, a_n/a_(n+1)).
    #[arg(long, default_value = "term", requires = "table")]
    columns: String,
    /// Exponent of the p-series 1/n^p.
    #[arg(long)]
    p: Option<f64>,
    /// Exponent of the last logarithm (log-power, iterlog-power).
    #[arg(long)]
    r: Option<f64>,
    /// Number of unit-power iterated logarithms in the iterlog-power family.
    #[arg(long, default_value_t = 1)]
    depth: u32,
    /// Common ratio of the geometric series x^n.
    #[arg(long)]
    x: Option<f64>,
    #[command(flatten)]
    opts: ClassifyOpts,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["family", "lambda_expr", "delta_expr"]))]
struct BdpArgs {
    /// Builtin rates: power-ratio (lambda/mu = 1 + c/n), threshold
    /// (level-K boundary with coefficient c) or symmetric.
    #[arg(long, value_parser = ["power-ratio", "threshold", "symmetric"])]
    family: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    /// Level of the threshold family.
    #[arg(long, default_value_t = 1)]
    level: u32,
    /// Expression for the birth rate lambda_n.
    #[arg(long = "lambda-expr", requires = "mu_expr")]
    lambda_expr: Option<String>,
    /// Expression for the death rate mu_n.
    #[arg(long = "mu-expr", requires = "lambda_expr")]
    mu_expr: Option<String>,
    /// Expression for lambda_n/mu_n - 1.
    #[arg(long = "delta-expr")]
    delta_expr: Option<String>,
    #[command(flatten)]
    opts: ClassifyOpts,
}

#[derive(Args, Debug, Clone)]
#[command(group = clap::ArgGroup::new("drift").required(true).args(["alpha_const", "alpha_expr"]))]
struct DriftArgs {
    /// Constant drift coefficient alpha.
    #[arg(long = "alpha-const")]
    alpha_const: Option<f64>,
    /// Expression for alpha_n.
    #[arg(long = "alpha-expr")]
    alpha_expr: Option<String>,
    /// Bound C in 0 < alpha_n < min(C, n/2).
    #[arg(long = "C", default_value_t = 1.0)]
    cap: f64,
}

impl DriftArgs {
    fn spec<R: Real>(&self) -> Result<DriftSpec<R>> {
        match (&self.alpha_const, &self.alpha_expr) {
            (Some(a), _) => DriftSpec::constant(*a, self.cap),
            (None, Some(text)) => {
                let e = Expr::parse(text)?;
                DriftSpec::new(self.cap, move |n| e.eval::<R>(n))
            }
            (None, None) => Err(Error::InvalidArgument("no drift given".into())),
        }
    }

    fn echo(&self) -> Value {
        match (&self.alpha_const, &self.alpha_expr) {
            (Some(a), _) => json!({"kind": "constant", "alpha": a, "C": self.cap}),
            (_, text) => json!({"kind": "expression", "alpha": text, "C": self.cap}),
        }
    }
}

#[derive(Args, Debug)]
struct WalkArgs {
    #[command(flatten)]
    drift: DriftArgs,
    #[command(flatten)]
    opts: ClassifyOpts,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    drift: DriftArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1000", value_parser = parse_index)]
    paths: u64,
    #[arg(long, default_value = "10000", value_parser = parse_index)]
    horizon: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct IterlogArgs {
    /// Number of logarithms applied.
    #[arg(long = "K")]
    k: u32,
    #[arg(long, value_parser = parse_index)]
    n: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: f64,
}

/// The document written to standard output.
#[derive(Serialize)]
struct Report {
    schema_version: u32,
    tool: Tool,
    mode: &'static str,
    input: Value,
    result: Value,
    warnings: Vec<String>,
    timing: Timing,
}

struct Outcome {
    mode: &'static str,
    input: Value,
    result: Value,
    warnings: Vec<String>,
    text: String,
    exit: i32,
    format: Format,
}

/// Parses `argv` (including the program name), runs the command and writes
/// the report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_DECISIVE;
        }
    };
    let start = Instant::now();
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli.command, args) {
        Ok(o) => {
            let written = match o.format {
                Format::Json => {
                    let report = Report {
                        schema_version: SCHEMA_VERSION,
                        tool: Tool {
                            name: env!("CARGO_PKG_NAME"),
                            version: env!("CARGO_PKG_VERSION"),
                        },
                        mode: o.mode,
                        input: o.input,
                        result: o.result,
                        warnings: o.warnings,
                        timing: Timing {
                            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                        },
                    };
                    serde_json::to_writer_pretty(&mut *out, &report)
                        .map_err(std::io::Error::from)
                        .and_then(|_| writeln!(out))
                }
                Format::Text => {
                    let mut text = o.text;
                    for w in &o.warnings {
                        text.push_str(&format!("warning: {w}\n"));
                    }
                    write!(out, "{text}")
                }
            };
            match written {
                Ok(()) => o.exit,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot write report: {e}");
                    EXIT_ERROR
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn execute(command: Command, argv: Vec<String>) -> Result<Outcome> {
    match command {
        Command::ClassifySeries(a) => classify_series(a, argv),
        Command::ClassifyBdp(a) => classify_bdp(a, argv),
        Command::ClassifyWalk(a) => classify_walk(a, argv),
        Command::SimulateWalk(a) => simulate_walk(a, argv),
        Command::EvalIterlog(a) => eval_iterlog(a, argv),
    }
}

fn need(v: Option<f64>, flag: &str, family: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidArgument(format!("family {family} needs --{flag}")))
}

fn series_family(a: &SeriesArgs, name: &str) -> Result<SeriesFamily> {
    let fam = match name {
        "p-series" => SeriesFamily::PSeries {
            p: need(a.p, "p", name)?,
        },
        "log-power" => SeriesFamily::LogPower {
            r: need(a.r, "r", name)?,
        },
        "iterlog-power" => SeriesFamily::IterlogPower {
            depth: a.depth,
            r: need(a.r, "r", name)?,
        },
        "geometric" => SeriesFamily::Geometric {
            x: need(a.x, "x", name)?,
        },
        other => return Err(Error::InvalidArgument(format!("unknown family {other}"))),
    };
    fam.validate()?;
    Ok(fam)
}

fn series_source<R: Real>(a: &SeriesArgs) -> Result<(RatioSpec<R>, Value)> {
    if let Some(name) = &a.family {
        let fam = series_family(a, name)?;
        return Ok((fam.ratio_spec()?, json!({"kind": "family", "spec": fam})));
    }
    if let Some(text) = &a.expr {
        let e = Expr::parse(text)?;
        let spec = RatioSpec::new(1, move |n| Ok(e.eval::<R>(n)? / e.eval::<R>(n + 1)?));
        return Ok((
            spec,
            json!({"kind": "expression", "target": "term", "text": text}),
        ));
    }
    if let Some(text) = &a.delta_expr {
        let e = Expr::parse(text)?;
        let spec = RatioSpec::from_delta(1, move |n| e.eval::<R>(n));
        return Ok((
            spec,
            json!({"kind": "expression", "target": "delta", "text": text}),
        ));
    }
    if let Some(path) = &a.table {
        let columns: Columns = a.columns.parse()?;
        let table = Table::from_path(path, columns)?;
        let echo = json!({
            "kind": "table",
            "path": path.display().to_string(),
            "columns": columns,
            "rows": table.rows(),
            "ratios": table.support().len(),
        });
        return Ok((table.ratio_spec(), echo));
    }
    Err(Error::InvalidArgument("no series source given".into()))
}

fn bdp_source<R: Real>(a: &BdpArgs) -> Result<(BirthDeathRates<R>, Value)> {
    if let Some(name) = &a.family {
        let rates = match name.as_str() {
            "power-ratio" => BirthDeathRates::power_ratio(need(a.c, "c", name)?)?,
            "threshold" => BirthDeathRates::threshold(Level::new(a.level)?, need(a.c, "c", name)?)?,
            _ => BirthDeathRates::symmetric(),
        };
        let echo = match name.as_str() {
            "symmetric" => json!({"kind": "family", "family": name}),
            "power-ratio" => json!({"kind": "family", "family": name, "c": a.c}),
            _ => json!({"kind": "family", "family": name, "c": a.c, "level": a.level}),
        };
        return Ok((rates, echo));
    }
    if let (Some(l), Some(m)) = (&a.lambda_expr, &a.mu_expr) {
        let (le, me) = (Expr::parse(l)?, Expr::parse(m)?);
        let rates = BirthDeathRates::new(1, move |n| le.eval::<R>(n), move |n| me.eval::<R>(n));
        return Ok((rates, json!({"kind": "expression", "lambda": l, "mu": m})));
    }
    if let Some(text) = &a.delta_expr {
        let e = Expr::parse(text)?;
        let d = e.clone();
        let rates =
            BirthDeathRates::new(1, move |n| Ok(R::one() + e.eval::<R>(n)?), |_| Ok(R::one()))
                .with_ratio_delta(move |n| d.eval::<R>(n));
        return Ok((
            rates,
            json!({"kind": "expression", "target": "delta", "text": text}),
        ));
    }
    Err(Error::InvalidArgument("no rates given".into()))
}

fn config_echo(opts: &ClassifyOpts) -> Value {
    json!({"config": opts.config(), "precision": opts.precision})
}

fn input_echo(command: &str, argv: Vec<String>, source: Value, extra: Value) -> Value {
    let mut v = json!({"command": command, "argv": argv, "source": source});
    if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v
}

fn verdict_warnings(v: &Verdict, cfg: &ClassifyConfig) -> Vec<String> {
    let mut w = Vec::new();
    if v.dropped > 0 {
        w.push(format!(
            "{} tail sample(s) dropped: cancellation exceeds half the input precision",
            v.dropped
        ));
    }
    if v.decision == Decision::Inconclusive {
        if v.usable_tail().next().is_none() {
            w.push("no usable tail samples".into());
        } else {
            w.push(format!(
                "no decisive verdict for K in {}..={}; the tail stays within the margin or is contradicted at the next level",
                cfg.k_start, cfg.k_max
            ));
        }
    }
    w
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x}"))
}

fn verdict_text(decision: &str, v: &Verdict) -> String {
    let mut t = format!("decision: {decision}\n");
    if let Some(level) = v.level {
        t.push_str(&format!("level: {level}\n"));
    }
    t.push_str(&format!("window: [{}, {}]\n", v.window.lo, v.window.hi));
    t.push_str(&format!(
        "tail: {} samples, range [{}, {}], threshold {} +/- {}\n",
        v.tail().len(),
        fmt_opt(v.s_min),
        fmt_opt(v.s_max),
        v.threshold,
        v.margin
    ));
    for step in &v.escalation {
        t.push_str(&format!(
            "  K={}: candidate {:?}, range [{}, {}], {:?}\n",
            step.level,
            step.candidate,
            fmt_opt(step.s_min),
            fmt_opt(step.s_max),
            step.outcome
        ));
    }
    t
}

fn exit_for(decisive: bool) -> i32 {
    if decisive {
        EXIT_DECISIVE
    } else {
        EXIT_INCONCLUSIVE
    }
}

fn classify_series(a: SeriesArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.opts.config();
    let (verdict, source) = match a.opts.precision {
        Precision::Native => {
            let (spec, src) = series_source::<f64>(&a)?;
            (adaptive_classify(&spec, &cfg)?, src)
        }
        Precision::Extended => {
            let (spec, src) = series_source::<Dd>(&a)?;
            (adaptive_classify(&spec, &cfg)?, src)
        }
    };
    let decision = serde_json::to_value(verdict.decision).expect("enum serializes");
    let text = format!(
        "mode: series\n{}",
        verdict_text(decision.as_str().unwrap_or(""), &verdict)
    );
    Ok(Outcome {
        mode: "series",
        input: input_echo("classify-series", argv, source, config_echo(&a.opts)),
        warnings: verdict_warnings(&verdict, &cfg),
        exit: exit_for(verdict.decision.is_decisive()),
        result: json!({"decision": verdict.decision, "evidence": verdict}),
        text,
        format: a.opts.format,
    })
}

fn recurrence_outcome(
    mode: &'static str,
    command: &str,
    c: Classification,
    source: Value,
    opts: &ClassifyOpts,
    argv: Vec<String>,
) -> Outcome {
    let decision = serde_json::to_value(c.decision).expect("enum serializes");
    let text = format!(
        "mode: {mode}\n{}series of prod mu/lambda: {:?}\n",
        verdict_text(decision.as_str().unwrap_or(""), &c.evidence),
        c.evidence.decision
    );
    Outcome {
        mode,
        input: input_echo(command, argv, source, config_echo(opts)),
        warnings: verdict_warnings(&c.evidence, &opts.config()),
        exit: exit_for(c.decision != Recurrence::Inconclusive),
        result: json!({"decision": c.decision, "evidence": c.evidence}),
        text,
        format: opts.format,
    }
}

fn classify_bdp(a: BdpArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.opts.config();
    let (c, source) = match a.opts.precision {
        Precision::Native => {
            let (rates, src) = bdp_source::<f64>(&a)?;
            (bdp_classify(&rates, &cfg)?, src)
        }
        Precision::Extended => {
            let (rates, src) = bdp_source::<Dd>(&a)?;
            (bdp_classify(&rates, &cfg)?, src)
        }
    };
    Ok(recurrence_outcome(
        "bdp",
        "classify-bdp",
        c,
        source,
        &a.opts,
        argv,
    ))
}

fn classify_walk(a: WalkArgs, argv: Vec<String>) -> Result<Outcome> {
    let cfg = a.opts.config();
    let c = match a.opts.precision {
        Precision::Native => rw_classify(&a.drift.spec::<f64>()?, &cfg)?.evidence,
        Precision::Extended => rw_classify(&a.drift.spec::<Dd>()?, &cfg)?.evidence,
    };
    Ok(recurrence_outcome(
        "rwalk",
        "classify-walk",
        c,
        a.drift.echo(),
        &a.opts,
        argv,
    ))
}

fn simulate_walk(a: SimulateArgs, argv: Vec<String>) -> Result<Outcome> {
    let spec = a.drift.spec::<f64>()?;
    let rep = simulate(&spec, a.seed, a.horizon, a.paths)?;
    let text = format!(
        "mode: simulate\npaths: {}\nhorizon: {}\nseed: {}\nreturned: {} ({})\nmean first return: {}\nmax excursion: {}\nfinal position: min {} max {} mean {}\n",
        rep.n_paths,
        rep.horizon,
        rep.seed,
        rep.returned,
        rep.returned_fraction,
        fmt_opt(rep.mean_first_return),
        rep.max_excursion,
        rep.final_positions.min,
        rep.final_positions.max,
        rep.final_positions.mean
    );
    let extra = json!({"seed": a.seed, "paths": a.paths, "horizon": a.horizon});
    Ok(Outcome {
        mode: "simulate",
        input: input_echo("simulate-walk", argv, a.drift.echo(), extra),
        result: serde_json::to_value(&rep).expect("report serializes"),
        warnings: Vec::new(),
        text,
        exit: EXIT_DECISIVE,
        format: a.format,
    })
}

fn eval_iterlog(a: IterlogArgs, argv: Vec<String>) -> Result<Outcome> {
    let level = Level::new(a.k)?;
    let n: Dd = index_to_real(a.n)?;
    let value = iterlog::iterlog(level, n)?;
    let min_domain = iterlog::min_domain(level).ok();
    let weight = if min_domain.is_some_and(|m| a.n >= m) {
        Some(iterlog::zeta_weight::<Dd>(level, a.n)?.to_f64())
    } else {
        None
    };
    let result = json!({
        "K": a.k,
        "n": a.n,
        "value": value.to_f64(),
        "value_lo": value.lo(),
        "min_domain": min_domain,
        "zeta_weight": weight,
    });
    let text = format!(
        "ln_({}) {} = {}\nmin_domain: {}\nzeta_weight: {}\n",
        a.k,
        a.n,
        value.to_f64(),
        min_domain.map_or_else(|| "-".into(), |m| m.to_string()),
        fmt_opt(weight)
    );
    Ok(Outcome {
        mode: "iterlog",
        input: input_echo("eval-iterlog", argv, json!({"K": a.k, "n": a.n}), json!({})),
        result,
        warnings: Vec::new(),
        text,
        exit: EXIT_DECISIVE,
        format: a.format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("bdm").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn index_flags_accept_scientific_notation() {
        assert_eq!(parse_index("1e7"), Ok(10_000_000));
        assert_eq!(parse_index("250"), Ok(250));
        assert!(parse_index("1.5").is_err());
        assert!(parse_index("-3").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, out, err) = run_capture(&["classify-series"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(out.is_empty() && !err.is_empty());
        let (code, _, _) = run_capture(&["classify-series", "--family", "p-series", "--expr", "n"]);
        assert_eq!(code, EXIT_ERROR);
        let (code, _, _) = run_capture(&["no-such-command"]);
        assert_eq!(code, EXIT_ERROR);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("classify-series"));
    }

    #[test]
    fn missing_family_parameter() {
        let (code, _, err) = run_capture(&["classify-series", "--family", "p-series"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("--p"), "{err}");
    }

    #[test]
    fn eval_iterlog_report() {
        let (code, out, _) = run_capture(&["eval-iterlog", "--K", "3", "--n", "100"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["mode"], "iterlog");
        assert!((v["result"]["value"].as_f64().unwrap() - 0.4234226524603038).abs() < 1e-16);
        assert_eq!(v["result"]["min_domain"], 16);
        let (code, _, _) = run_capture(&["eval-iterlog", "--K", "3", "--n", "2"]);
        assert_eq!(code, EXIT_ERROR);
    }
}
