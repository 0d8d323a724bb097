//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven from tests.
//!
//! Results go to stdout as JSON or CSV, diagnostics to stderr. Exit codes:
//! 0 on success, 2 on usage errors (bad flags, unreadable or malformed
//! inputs), 1 on failures during computation.
//!
//! Any subcommand accepts `--config FILE`, a JSON object whose keys are flag
//! names (`{"n": 3, "model": "iid", "p": 0.8}`). Flags given on the command
//! line take precedence. A `"command"` key selects the subcommand when none
//! is given. `VORACE_THREADS` sets the worker thread count.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::data::{bundled, Dataset, Schema, BUNDLED};
use crate::ensemble::{evaluate, EnsembleConfig, EvalReport};
use crate::error::Error;
use crate::montecarlo::{simulate, SimConfig, SimTie, VoterModel};
use crate::theory::{
    mu_pid, parse_rational, t_p_binary, t_p_oracle, t_p_paper, to_f64, BinaryTie, KVariant, OracleInput,
    OracleTie, Rational, TheoryParams,
};
use crate::types::{ClassLabel, Profile};
use crate::voting::{Rule, TiePolicy, DEFAULT_KEMENY_THRESHOLD};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "VORACE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "vorace", version, about = "Voting ensembles of random classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate exact accuracy formulas over a parameter grid.
    Theory(TheoryArgs),
    /// Estimate a rule's accuracy on synthetic voters.
    Simulate(SimulateArgs),
    /// Cross-validate an ensemble on a dataset.
    Run(RunArgs),
    /// Apply a voting rule to a profile file.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// Closed form with the normalization chosen by --variant.
    Paper,
    /// Closed form without normalization.
    Model,
    /// Exhaustive enumeration (small instances only).
    Oracle,
    /// Probability that the best class outscores every other.
    Mu,
    /// Binomial tail, strict majority.
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct TheoryArgs {
    /// Ensemble sizes: values and ranges, e.g. `1,3,10..100:10`.
    #[arg(long, value_delimiter = ',', default_value = "10,50,100")]
    n: Vec<String>,
    /// Class counts.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    m: Vec<usize>,
    /// Accuracies as decimals or fractions. Overrides --p-step.
    #[arg(long, value_delimiter = ',')]
    p: Vec<String>,
    /// Spacing of the accuracy grid 0, s, 2s, ..., 1 used without --p.
    #[arg(long, default_value = "0.05")]
    p_step: String,
    /// Normalization for the `paper` method.
    #[arg(long, default_value = "theorem")]
    variant: String,
    /// Methods to tabulate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "paper,model,oracle")]
    compare: Vec<Method>,
    /// Tie handling for the `oracle` method.
    #[arg(long, default_value = "strict-win")]
    oracle_tie: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Iid,
    Hetero,
    Overlap,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "iid")]
    model: ModelKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Voter accuracy (iid and overlap models).
    #[arg(long)]
    p: Option<f64>,
    /// Probability of an input every voter gets right (overlap model).
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Per-voter accuracies (hetero model); sets n.
    #[arg(long, value_delimiter = ',')]
    accuracies: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "plurality")]
    rule: String,
    #[arg(long, default_value = "strict")]
    tie: String,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct RunArgs {
    /// CSV path, or one of the bundled names (iris, wine, balance-scale).
    #[arg(long)]
    data: String,
    /// Schema JSON. Defaults to `<data stem>.schema.json` beside the CSV,
    /// then to all-numerical features with the label in --label.
    #[arg(long)]
    schema: Option<String>,
    #[arg(long, default_value = "class")]
    label: String,
    /// Classifiers per ensemble.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Rules to evaluate, one report each.
    #[arg(long, value_delimiter = ',', default_value = "plurality")]
    rule: Vec<String>,
    /// Tie policy; best-classifier when omitted.
    #[arg(long)]
    tie: Option<String>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest class count solved exactly by `kemeny`.
    #[arg(long, default_value_t = DEFAULT_KEMENY_THRESHOLD)]
    kemeny_threshold: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct AggregateArgs {
    /// Profile JSON: `{"m": 4, "rankings": [[0, 3, 1, 2], ...]}`.
    #[arg(long)]
    profile: String,
    #[arg(long, default_value = "plurality")]
    rule: String,
    /// Tie policy; best-classifier when the profile has accuracies.
    #[arg(long)]
    tie: Option<String>,
    #[arg(long, default_value_t = DEFAULT_KEMENY_THRESHOLD)]
    kemeny_threshold: usize,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure { code: 1, message: e.to_string() }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let outcome = expand_config(args).and_then(|args| match Cli::try_parse_from(&args) {
        Ok(cli) => dispatch(cli.command, out),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                Ok(())
            } else {
                let _ = write!(err, "{e}");
                Err(Failure { code: 2, message: String::new() })
            }
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}

/// Configures the global thread pool from [`THREADS_ENV`].
pub fn init_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV}={raw} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

const SUBCOMMANDS: [&str; 4] = ["theory", "simulate", "run", "aggregate"];

/// Replaces `--config FILE` with the flags it holds, placed right after the
/// subcommand so that explicit flags (parsed later) win.
fn expand_config(mut args: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err(usage("--config needs a file"));
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(usage(format!("{path}: config must be a JSON object")));
    };

    let mut position = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    if position.is_none() {
        if let Some(Value::String(cmd)) = map.get("command") {
            args.insert(1, cmd.clone());
            position = Some(1);
        }
    }
    let Some(position) = position else {
        return Err(usage("no subcommand given on the command line or in the config"));
    };

    let mut flags = Vec::new();
    for (key, value) in &map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            _ => Err(usage(format!("{path}: unsupported value for '{key}'"))),
        };
        match value {
            Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?;
                flags.push(flag);
                flags.push(parts.join(","));
            }
            v => {
                flags.push(flag);
                flags.push(scalar(v)?);
            }
        }
    }
    args.splice(position + 1..position + 1, flags);
    Ok(args)
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    let text = match command {
        Command::Theory(a) => cmd_theory(&a)?,
        Command::Simulate(a) => cmd_simulate(&a)?,
        Command::Run(a) => cmd_run(&a)?,
        Command::Aggregate(a) => cmd_aggregate(&a)?,
    };
    out.write_all(text.as_bytes()).map_err(runtime)
}

fn to_json_line(value: &impl Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string(value).map_err(runtime)?;
    s.push('\n');
    Ok(s)
}

/// Parses `3`, `10..100` (inclusive) and `10..100:10`.
fn parse_sizes(items: &[String]) -> CliResult<Vec<usize>> {
    let mut sizes = Vec::new();
    for item in items {
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad size '{s}' in '{item}'")))
        };
        match item.split_once("..") {
            None => sizes.push(num(item)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (num(hi)?, num(step)?),
                    None => (num(rest)?, 1),
                };
                if step == 0 {
                    return Err(usage(format!("zero step in '{item}'")));
                }
                sizes.extend((num(lo)?..=hi).step_by(step));
            }
        }
    }
    if sizes.is_empty() {
        return Err(usage("empty size list"));
    }
    Ok(sizes)
}

fn p_grid(args: &TheoryArgs) -> CliResult<Vec<Rational>> {
    if !args.p.is_empty() {
        return args.p.iter().map(|s| parse_rational(s).map_err(usage)).collect();
    }
    let step = parse_rational(&args.p_step).map_err(usage)?;
    if step <= Rational::from_integer(0.into()) || step > Rational::from_integer(1.into()) {
        return Err(usage("--p-step must lie in (0, 1]"));
    }
    let one = Rational::from_integer(1.into());
    let mut grid = Vec::new();
    let mut k = 0i64;
    loop {
        let p = &step * Rational::from_integer(k.into());
        if p > one {
            break;
        }
        grid.push(p);
        k += 1;
    }
    Ok(grid)
}

#[derive(Debug, Serialize)]
struct TheoryRow {
    n: usize,
    m: usize,
    p: String,
    method: Method,
    value_exact: Option<String>,
    value_float: Option<f64>,
    error: Option<String>,
}

fn theory_value(method: Method, n: usize, m: usize, p: &Rational, variant: KVariant, tie: OracleTie) -> crate::Result<Rational> {
    let params = TheoryParams::new(n, m, p.clone())?;
    match method {
        Method::Paper => t_p_paper(&params, variant),
        Method::Model => t_p_paper(&params, KVariant::Model),
        Method::Oracle => t_p_oracle(&OracleInput::Homogeneous(params), tie),
        Method::Mu => mu_pid(n, m, p),
        Method::Binary => Ok(t_p_binary(n, p, BinaryTie::Strict)),
    }
}

fn cmd_theory(args: &TheoryArgs) -> CliResult<String> {
    let sizes = parse_sizes(&args.n)?;
    let grid = p_grid(args)?;
    let variant: KVariant = args.variant.parse().map_err(usage)?;
    let tie: OracleTie = args.oracle_tie.parse().map_err(usage)?;
    for &m in &args.m {
        if m < 2 {
            return Err(usage(format!("class count m = {m} must be >= 2")));
        }
    }
    for p in &grid {
        if *p < Rational::from_integer(0.into()) || *p > Rational::from_integer(1.into()) {
            return Err(usage(format!("p = {p} must lie in [0, 1]")));
        }
    }
    for &n in &sizes {
        if n == 0 {
            return Err(usage("ensemble size n must be >= 1"));
        }
    }

    let mut cells = Vec::new();
    for &n in &sizes {
        for &m in &args.m {
            for p in &grid {
                for &method in &args.compare {
                    cells.push((n, m, p, method));
                }
            }
        }
    }
    let rows: Vec<TheoryRow> = cells
        .par_iter()
        .map(|&(n, m, p, method)| {
            let value = theory_value(method, n, m, p, variant, tie);
            TheoryRow {
                n,
                m,
                p: p.to_string(),
                method,
                value_float: value.as_ref().ok().map(to_f64),
                value_exact: value.as_ref().ok().map(ToString::to_string),
                error: value.err().map(|e| e.to_string()),
            }
        })
        .collect();

    match args.format {
        Format::Json => to_json_line(&rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "m", "p", "method", "value_exact", "value_float", "error"])
                .map_err(runtime)?;
            for r in &rows {
                let method = serde_json::to_value(r.method).map_err(runtime)?;
                w.write_record([
                    r.n.to_string(),
                    r.m.to_string(),
                    r.p.clone(),
                    method.as_str().unwrap_or_default().to_string(),
                    r.value_exact.clone().unwrap_or_default(),
                    r.value_float.map(|v| v.to_string()).unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(runtime)?;
            }
            String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let need_p = || args.p.ok_or_else(|| usage("--p is required for this model"));
    let model = match args.model {
        ModelKind::Iid => VoterModel::Iid { p: need_p()? },
        ModelKind::Overlap => VoterModel::Overlap { p: need_p()?, rho: args.rho },
        ModelKind::Hetero => {
            if args.accuracies.is_empty() {
                return Err(usage("--accuracies is required for the hetero model"));
            }
            VoterModel::Hetero { accuracies: args.accuracies.clone() }
        }
    };
    let n = match (args.n, args.model) {
        (Some(n), _) => n,
        (None, ModelKind::Hetero) => args.accuracies.len(),
        (None, _) => return Err(usage("--n is required")),
    };
    let config = SimConfig {
        n,
        m: args.m,
        trials: args.trials,
        seed: args.seed,
        model,
        rule: args.rule.parse().map_err(usage)?,
        tie: args.tie.parse::<SimTie>().map_err(usage)?,
    };
    config.validate().map_err(usage)?;
    let result = simulate(&config).map_err(runtime)?;
    to_json_line(&json!({
        "config": config,
        "wins": result.wins,
        "trials": result.trials,
        "rate": result.rate,
        "stderr": result.stderr,
        "voter_accuracy": result.voter_accuracy,
    }))
}

fn load_dataset(args: &RunArgs) -> crate::Result<Dataset> {
    let path = Path::new(&args.data);
    if !path.exists() && BUNDLED.contains(&args.data.as_str()) {
        return bundled(&args.data);
    }
    if !path.is_file() {
        return Err(Error::InvalidInput(format!(
            "'{}' is neither a file nor a bundled dataset ({})",
            args.data,
            BUNDLED.join(", ")
        )));
    }
    let schema = match &args.schema {
        Some(s) => Schema::from_path(s)?,
        None => {
            let sibling = path.with_extension("schema.json");
            if sibling.is_file() {
                Schema::from_path(sibling)?
            } else {
                Schema {
                    label: args.label.clone(),
                    columns: Vec::new(),
                    classes: None,
                }
            }
        }
    };
    Dataset::load_csv(path, &schema)
}

fn cmd_run(args: &RunArgs) -> CliResult<String> {
    let rules = args
        .rule
        .iter()
        .map(|r| r.parse::<Rule>())
        .collect::<crate::Result<Vec<_>>>()
        .map_err(usage)?;
    let tie = args.tie.as_deref().map(str::parse::<TiePolicy>).transpose().map_err(usage)?;
    if args.n == 0 {
        return Err(usage("--n must be >= 1"));
    }
    let dataset = load_dataset(args).map_err(|e| usage(format!("{}: {e}", args.data)))?;

    let mut reports: Vec<EvalReport> = Vec::new();
    for rule in rules {
        let config = EnsembleConfig {
            n: args.n,
            rule,
            tie,
            seed: args.seed,
            kemeny_exact_threshold: args.kemeny_threshold,
        };
        reports.push(evaluate(&dataset, &config, args.folds, args.repeats).map_err(|e| match e {
            Error::InvalidInput(_) => usage(e),
            e => runtime(e),
        })?);
    }
    match args.format {
        Format::Json => to_json_line(&json!({
            "dataset": args.data,
            "rows": dataset.len(),
            "classes": dataset.class_names,
            "reports": reports,
        })),
        Format::Csv => {
            let mut s = format!("dataset,{}\n", EvalReport::CSV_HEADER);
            for r in &reports {
                s.push_str(&format!("{},{}\n", csv_field(&args.data), r.csv_row()));
            }
            Ok(s)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_aggregate(args: &AggregateArgs) -> CliResult<String> {
    let rule: Rule = args.rule.parse().map_err(usage)?;
    let text = std::fs::read_to_string(&args.profile).map_err(|e| usage(format!("{}: {e}", args.profile)))?;
    let profile = Profile::from_json(&text).map_err(|e| usage(format!("{}: {e}", args.profile)))?;
    let tie = match &args.tie {
        Some(t) => t.parse().map_err(usage)?,
        None => TiePolicy::default_for(&profile),
    };
    let result = profile_election(rule, &profile, tie, args.kemeny_threshold)?;
    to_json_line(&json!({
        "rule": rule,
        "tie": tie,
        "winner": result.winner,
        "winner_label": ClassLabel::new(result.winner).to_string(),
        "rule_scores": result.rule_scores,
        "tied_set": result.tied_set,
        "consensus": result.consensus,
    }))
}

fn profile_election(rule: Rule, profile: &Profile, tie: TiePolicy, threshold: usize) -> CliResult<crate::voting::RuleResult> {
    if rule == Rule::Sum {
        return Err(usage("the sum rule needs score vectors; a ranking profile cannot be summed"));
    }
    rule.elect(profile, tie, threshold).map_err(|e| match e {
        Error::InvalidInput(_) | Error::TooLarge(_) => usage(e),
        e => runtime(e),
    })
}
