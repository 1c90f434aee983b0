//! `hyperpctl` command-line front end.
//!
//! Exit codes: `check` returns 0 when the sentence holds, 1 when it does not;
//! `validate` returns 1 for a model that parses but is not a DTMC. Every
//! other failure (usage, I/O, syntax, budget) returns 2.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hyperpctl::checker::{check_formula, Binding, CheckOptions, Verdict};
use hyperpctl::formula::{
    bind_free, desugar_expr, parse_formula, parse_prob_expr, ProbExpr, StateFormula,
};
use hyperpctl::model::{parse_model, parse_model_unchecked, Dtmc};
use hyperpctl::product::{self_compose, DEFAULT_STATE_BUDGET};
use hyperpctl::qbf::{parse_qbf, reduce};
use hyperpctl::rational::{format_decimal, format_rational, parse_rational};
use hyperpctl::sim::{estimate, SimConfig};
use hyperpctl::templates::{self, BisimulationForm, Partition};

const VERSION: &str = env!("CARGO_PKG_VERSION");

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "hyperpctl", version, about = "Exact HyperPCTL model checking for DTMCs")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a sentence against a model.
    Check(CheckArgs),
    /// Report whether a model file describes a DTMC.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the n-fold self-composition of a model.
    Compose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
    },
    /// Turn a QBF into a model and a sentence that holds iff the QBF is true.
    ReduceQbf {
        #[arg(long)]
        qbf: PathBuf,
        #[command(flatten)]
        out: OutputFiles,
    },
    /// Emit a sentence for a standard hyperproperty.
    Template {
        #[command(subcommand)]
        template: Template,
    },
    /// Estimate a path probability by sampling.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    /// File holding the sentence.
    #[arg(long, required_unless_present = "sentence", conflicts_with = "sentence")]
    formula: Option<PathBuf>,
    /// The sentence itself.
    #[arg(long)]
    sentence: Option<String>,
    /// Largest number of product states to build.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
    /// Probability expression to tabulate over the product, e.g. "P(F a@s)".
    #[arg(long)]
    probe: Vec<String>,
}

#[derive(Debug, Args)]
struct OutputFiles {
    /// Write the model here instead of standard output.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Write the sentence here instead of standard output.
    #[arg(long)]
    formula_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Template {
    /// Low-observable next-step probabilities agree forever.
    Noninterference {
        #[arg(long)]
        low: String,
        #[arg(long)]
        guard: Option<String>,
    },
    /// Bounded, state-independent leakage to low outputs.
    Qif {
        #[arg(long = "low", required = true)]
        lows: Vec<String>,
        #[arg(long)]
        bound: String,
        #[arg(long)]
        guard: Option<String>,
    },
    /// Reachability of `out` differs by at most `factor` between two inputs.
    DifferentialPrivacy {
        #[arg(long)]
        factor: String,
        #[arg(long)]
        pre1: String,
        #[arg(long)]
        pre2: String,
        #[arg(long)]
        out: String,
    },
    /// Probabilistic causation of `effect` by `cause`.
    Causation {
        #[arg(long)]
        cause: String,
        #[arg(long)]
        effect: String,
        /// Screen off through the propositions of this model.
        #[arg(long)]
        screen_model: Option<PathBuf>,
        /// Propositions restricting the first and second state.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
        guard: Option<Vec<String>>,
    },
    /// Whether a partition of the model's states is a bisimulation.
    Bisimulation {
        #[arg(long)]
        model: PathBuf,
        /// Blocks separated by `;`, states by `,`, e.g. "0,1;2".
        #[arg(long)]
        partition: String,
        #[arg(long, default_value = "blk")]
        prefix: String,
        /// Use the unguarded invariant, which only proves bisimilarity.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: OutputFiles,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Path formula, with or without the enclosing `P(...)`, e.g. "F[0,10] a@s".
    #[arg(long)]
    path: String,
    /// Variable names in component order.
    #[arg(long, value_delimiter = ',', default_value = "s")]
    vars: Vec<String>,
    /// Base state per variable.
    #[arg(long, value_delimiter = ',')]
    start: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 100)]
    horizon: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn load_model(path: &Path) -> Result<Dtmc> {
    parse_model(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn bindings_text(bindings: &[Binding]) -> String {
    bindings
        .iter()
        .map(|b| format!("{} = {}", b.var, b.state))
        .collect::<Vec<_>>()
        .join(", ")
}

fn run_check(args: &CheckArgs, format: Format) -> Result<u8> {
    let m = load_model(&args.model)?;
    let text = match (&args.formula, &args.sentence) {
        (Some(path), _) => read(path)?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err("one of --formula or --sentence is required".into()),
    };
    let sentence = parse_formula(&text)?;
    let options = CheckOptions {
        budget: args.budget,
        probes: args.probe.clone(),
    };
    let verdict = check_formula(&m, &sentence, &options)?;
    match format {
        Format::Json => print_json(&verdict_json(&sentence, &verdict))?,
        Format::Text => print_verdict(&verdict),
    }
    Ok(if verdict.satisfied { 0 } else { 1 })
}

fn verdict_json(sentence: &StateFormula, v: &Verdict) -> serde_json::Value {
    json!({
        "version": VERSION,
        "sentence": sentence.to_string(),
        "verdict": if v.satisfied { "SAT" } else { "UNSAT" },
        "satisfied": v.satisfied,
        "witness": v.witness,
        "counterexample": v.counterexample,
        "probes": v.probes,
    })
}

/// `(0,12)` as `[0, 12]`, so rows sort by state rather than by text.
fn tuple_order(tuple: &str) -> Vec<usize> {
    tuple
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .filter_map(|part| part.parse().ok())
        .collect()
}

fn print_verdict(v: &Verdict) {
    println!("{}", if v.satisfied { "SAT" } else { "UNSAT" });
    if !v.witness.is_empty() {
        println!("witness: {}", bindings_text(&v.witness));
    }
    if !v.counterexample.is_empty() {
        println!("counterexample: {}", bindings_text(&v.counterexample));
    }
    for (probe, values) in &v.probes {
        println!("probe {probe}:");
        let mut rows: Vec<_> = values.iter().collect();
        rows.sort_by_key(|(tuple, _)| tuple_order(tuple));
        for (tuple, value) in rows {
            let decimal = parse_rational(value).map(|r| format_decimal(&r)).unwrap_or_default();
            println!("  {tuple} {value} ({decimal})");
        }
    }
}

fn run_validate(model: &Path, format: Format) -> Result<u8> {
    let m = parse_model_unchecked(&read(model)?).map_err(|e| format!("{}: {e}", model.display()))?;
    let violations: Vec<String> = m.validate().iter().map(ToString::to_string).collect();
    let transitions = m.transitions().count();
    match format {
        Format::Json => print_json(&json!({
            "version": VERSION,
            "valid": violations.is_empty(),
            "states": m.state_count(),
            "transitions": transitions,
            "propositions": m.atomic_props(),
            "violations": violations,
        }))?,
        Format::Text => {
            if violations.is_empty() {
                println!("valid DTMC: {} states, {transitions} transitions", m.state_count());
                let props: Vec<&str> = m.atomic_props().iter().map(String::as_str).collect();
                println!("propositions: {}", props.join(" "));
            } else {
                println!("invalid DTMC:");
                for v in &violations {
                    println!("  {v}");
                }
            }
        }
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn run_compose(model: &Path, arity: usize, budget: usize, format: Format) -> Result<u8> {
    let m = load_model(model)?;
    let pc = self_compose(&m, arity, budget)?;
    let product = pc.to_dtmc();
    match format {
        Format::Text => print!("{}", product.to_model_string()),
        Format::Json => {
            let transitions: Vec<_> = product
                .transitions()
                .map(|(s, t, p)| json!([s, t, format_rational(p)]))
                .collect();
            let tuples: Vec<_> = (0..pc.state_count()).map(|s| pc.decode(s)).collect();
            let labels: BTreeMap<usize, &BTreeSet<String>> = (0..product.state_count())
                .filter(|&s| !product.labels(s).is_empty())
                .map(|s| (s, product.labels(s)))
                .collect();
            print_json(&json!({
                "version": VERSION,
                "arity": arity,
                "states": pc.state_count(),
                "tuples": tuples,
                "transitions": transitions,
                "labels": labels,
            }))?;
        }
    }
    Ok(0)
}

/// Writes or prints a generated model and sentence.
fn emit(model: Option<&Dtmc>, sentence: &StateFormula, out: Option<&OutputFiles>, format: Format) -> Result<()> {
    let model_text = model.map(Dtmc::to_model_string);
    let sentence_text = sentence.to_string();
    let model_out = out.and_then(|o| o.model_out.as_deref());
    let formula_out = out.and_then(|o| o.formula_out.as_deref());
    if let (Some(path), Some(text)) = (model_out, &model_text) {
        write(path, text)?;
    }
    if let Some(path) = formula_out {
        write(path, &format!("{sentence_text}\n"))?;
    }
    match format {
        Format::Json => print_json(&json!({
            "version": VERSION,
            "model": model_text,
            "sentence": sentence_text,
        })),
        Format::Text => {
            if let (None, Some(text)) = (model_out, &model_text) {
                print!("{text}");
            }
            if formula_out.is_none() {
                println!("{sentence_text}");
            }
            Ok(())
        }
    }
}

fn run_reduce_qbf(qbf: &Path, out: &OutputFiles, format: Format) -> Result<u8> {
    let q = parse_qbf(&read(qbf)?)?;
    let (m, sentence) = reduce(&q);
    emit(Some(&m), &sentence, Some(out), format)?;
    Ok(0)
}

fn parse_partition(text: &str, state_count: usize) -> Result<Partition> {
    let mut blocks = Vec::new();
    for block in text.split(';') {
        let states = block
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad state `{}` in partition", s.trim()))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        blocks.push(states);
    }
    Ok(Partition::new(blocks, state_count)?)
}

fn run_template(template: &Template, format: Format) -> Result<u8> {
    let sentence = match template {
        Template::Noninterference { low, guard } => templates::noninterference(low, guard.as_deref())?,
        Template::Qif { lows, bound, guard } => {
            let lows: Vec<&str> = lows.iter().map(String::as_str).collect();
            templates::qif(&lows, &parse_rational(bound)?, guard.as_deref())?
        }
        Template::DifferentialPrivacy {
            factor,
            pre1,
            pre2,
            out,
        } => templates::differential_privacy(&parse_rational(factor)?, (pre1, pre2), out)?,
        Template::Causation {
            cause,
            effect,
            screen_model,
            guard,
        } => {
            let screening = screen_model
                .as_deref()
                .map(load_model)
                .transpose()?
                .map(|m| m.atomic_props().clone());
            let guard = guard.as_ref().map(|g| (g[0].as_str(), g[1].as_str()));
            templates::causation(cause, effect, screening.as_ref(), guard)?
        }
        Template::Bisimulation {
            model,
            partition,
            prefix,
            strict,
            out,
        } => {
            let m = load_model(model)?;
            let partition = parse_partition(partition, m.state_count())?;
            let form = if *strict {
                BisimulationForm::Strict
            } else {
                BisimulationForm::Exact
            };
            let (augmented, sentence) = templates::bisimulation(&m, &partition, prefix, form)?;
            emit(Some(&augmented), &sentence, Some(out), format)?;
            return Ok(0);
        }
    };
    emit(None, &sentence, None, format)?;
    Ok(0)
}

fn run_simulate(args: &SimulateArgs, format: Format) -> Result<u8> {
    let m = load_model(&args.model)?;
    let text = args.path.trim();
    let expr = if text.starts_with("P(") {
        parse_prob_expr(text)?
    } else {
        parse_prob_expr(&format!("P({text})"))?
    };
    let bindings: Vec<(String, usize)> = args
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i + 1))
        .collect();
    let path = match bind_free(&desugar_expr(&expr), &bindings)? {
        ProbExpr::Prob(path) => *path,
        other => return Err(format!("`{other}` is not a single P(...) term").into()),
    };
    let start = if args.start.is_empty() {
        vec![0; args.vars.len()]
    } else {
        args.start.clone()
    };
    let pc = self_compose(&m, args.vars.len(), args.budget)?;
    let start_index = pc.encode(&start)?;
    let config = SimConfig {
        trials: args.trials,
        horizon: args.horizon,
        seed: args.seed,
    };
    let e = estimate(&pc, &path, start_index, &config)?;
    match format {
        Format::Json => {
            let mut value = serde_json::to_value(&e)?;
            value["version"] = json!(VERSION);
            value["path"] = json!(args.path);
            value["start"] = json!(start);
            print_json(&value)?;
        }
        Format::Text => {
            let bound = if e.lower_bound { " (lower bound)" } else { "" };
            println!(
                "estimate {:.6} +- {:.6}{bound}: {}/{} successes, horizon {}, seed {}",
                e.estimate, e.standard_error, e.successes, e.trials, e.horizon, e.seed
            );
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Check(args) => run_check(args, cli.format),
        Command::Validate { model } => run_validate(model, cli.format),
        Command::Compose {
            model,
            arity,
            budget,
        } => run_compose(model, *arity, *budget, cli.format),
        Command::ReduceQbf { qbf, out } => run_reduce_qbf(qbf, out, cli.format),
        Command::Template { template } => run_template(template, cli.format),
        Command::Simulate(args) => run_simulate(args, cli.format),
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    version: &'a str,
    error: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    std::panic::set_hook(Box::new(|info| {
        eprintln!("error: internal failure: {info}");
    }));
    let outcome = std::panic::catch_unwind(|| run(&cli));
    match outcome {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            if cli.format == Format::Json {
                let report = ErrorReport {
                    version: VERSION,
                    error: e.to_string(),
                };
                if let Ok(text) = serde_json::to_string_pretty(&report) {
                    println!("{text}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
