//! `pact`: simulate coloured trees, print limit predictions and exact laws,
//! run the acceptance suite.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pact_core::harness::suite::{run_suite, SuiteReport, SuiteScale};
use pact_core::harness::{run_experiment, ExperimentConfig, OutputFormat, Statistic};
use pact_core::moments::{otter_dwass_pmf, root_cluster_limit};
use pact_core::oracle::{closed_form_pmf_alpha0, enumerate_small, exact_root_cluster_pmf, series_moments};
use pact_core::theory::{global_limit, regime, urn_prediction, z_moments, GlobalStatistic};
use pact_core::tree::{AlphaSpec, Model};
use pact_core::PactError;

#[derive(Parser, Debug)]
#[command(name = "pact", version, about = "Coloured preferential attachment trees: simulation, limit theory, exact laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow replicate trees and compare statistics with their limits.
    Simulate(SimulateArgs),
    /// Print limit predictions for a model.
    Theory(TheoryArgs),
    /// Exact root-cluster laws and moments at finite n.
    Oracle(OracleArgs),
    /// Run the acceptance suite; exit status 1 if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Attachment weight `alpha * outdegree + 1`, alpha >= 0.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "dary", required_unless_present = "dary")]
    alpha: Option<f64>,
    /// Increasing d-ary tree.
    #[arg(long)]
    dary: Option<u32>,
    /// Probability that a child keeps its parent's colour.
    #[arg(long)]
    p: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<Model> {
        let m = match (self.alpha, self.dary) {
            (Some(a), None) => Model::with_alpha(a, self.p)?,
            (None, Some(d)) => Model::dary(d, self.p)?,
            _ => bail!(PactError::InvalidArgument("give exactly one of --alpha and --dary".into())),
        };
        Ok(m)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Statistics, repeatable or comma separated: vertices, clusters, leaves,
    /// rootcluster, fringe:<k>, fringe:<pattern>;<pattern>, urn:<kind>.
    #[arg(long, default_value = "vertices,clusters,leaves,rootcluster")]
    stats: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Limit moments of the root cluster size instead of the global counts.
    #[arg(long)]
    root_cluster: bool,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value = "vertices,clusters,leaves")]
    stats: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    /// Weighted generating-function recursion.
    Exact,
    /// Exhaustive enumeration of coloured trees.
    Enumerate,
    /// Closed form, uniform attachment only.
    ClosedForm,
    /// Falling moments from series coefficients for every size up to n.
    /// Entry `i` of every output array refers to size `i`; entry 0 is unused.
    Series,
    /// Limit law of the finite root cluster in d-ary trees.
    OtterDwass,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Moment order for `--method series`.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "default")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Split on commas that are not inside parentheses.
fn split_stats(items: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for item in items {
        let mut depth = 0i32;
        let mut cur = String::new();
        for ch in item.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    out.push(std::mem::take(&mut cur));
                    continue;
                }
                _ => {}
            }
            cur.push(ch);
        }
        out.push(cur);
    }
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_stats(items: &[String]) -> Result<Vec<Statistic>> {
    Ok(split_stats(items).iter().map(|s| Statistic::parse(s)).collect::<pact_core::Result<Vec<_>>>()?)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let written = stdout.write_all(text.as_bytes()).and_then(|_| if text.ends_with('\n') { Ok(()) } else { stdout.write_all(b"\n") });
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

/// JSON document, or a two-column `name,value` CSV of its leaves.
fn render_value(v: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(v)?),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "value"])?;
            for (k, x) in rows {
                w.write_record([k, x])?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

fn model_json(m: &Model) -> Value {
    match m.alpha_spec() {
        AlphaSpec::NonNegative(a) => json!({ "alpha": a, "p": m.p() }),
        AlphaSpec::DAry(d) => json!({ "dary": d, "p": m.p() }),
    }
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let config = ExperimentConfig::new(args.model.model()?, args.n, args.reps, args.seed, parse_stats(&args.stats)?)?;
    let report = run_experiment(&config)?;
    emit(&report.render(args.output.format.into())?, &args.output.out)?;
    Ok(ExitCode::SUCCESS)
}

fn theory(args: &TheoryArgs) -> Result<ExitCode> {
    let m = args.model.model()?;
    let doc = if args.root_cluster {
        let limit = root_cluster_limit(&m, args.kmax)?;
        let mut v = json!({ "model": model_json(&m), "root_cluster": limit });
        if let pact_core::moments::RootClusterLimit::Finite { d, p } = limit {
            v["root_cluster"]["pmf"] = json!(otter_dwass_pmf(d, p, args.kmax)?.to_vec());
        }
        v
    } else {
        let mut preds = Vec::new();
        for stat in parse_stats(&args.stats)? {
            let p = match &stat {
                Statistic::Vertices => global_limit(&GlobalStatistic::Vertices, &m)?,
                Statistic::Clusters => global_limit(&GlobalStatistic::Clusters, &m)?,
                Statistic::Leaves => global_limit(&GlobalStatistic::Leaves, &m)?,
                Statistic::Fringe(ps) => global_limit(&GlobalStatistic::Fringe(ps.clone()), &m)?,
                Statistic::Urn(kind) => urn_prediction(kind, &m)?,
                Statistic::RootCluster => bail!(PactError::InvalidArgument("use --root-cluster for the root cluster".into())),
            };
            preds.push(serde_json::to_value(p)?);
        }
        json!({
            "model": model_json(&m),
            "regime": regime(&m),
            "z_moments": z_moments(&m).ok(),
            "predictions": preds,
        })
    };
    emit(&render_value(&doc, args.output.format)?, &args.output.out)?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    let m = args.model.model()?;
    let n = args.n;
    let mut doc = json!({ "model": model_json(&m), "n": n });
    match args.method {
        Method::Exact => doc["pmf"] = json!(exact_root_cluster_pmf(&m, n)?.to_vec()),
        Method::Enumerate => {
            let law = enumerate_small(&m, n)?;
            doc["pmf"] = json!(law.root_cluster_pmf().to_vec());
            doc["classes"] = serde_json::to_value(&law.classes)?;
        }
        Method::ClosedForm => {
            if m.alpha_spec() != AlphaSpec::NonNegative(0.0) {
                bail!(PactError::InvalidArgument("the closed form needs --alpha 0".into()));
            }
            doc["pmf"] = json!(closed_form_pmf_alpha0(n, m.p())?.to_vec());
        }
        Method::Series => {
            doc["k"] = json!(args.k);
            doc["falling_moments"] = json!(series_moments(&m, args.k, n)?.to_vec());
        }
        Method::OtterDwass => {
            let Some(d) = m.arity() else {
                bail!(PactError::InvalidArgument("the branching-process law needs --dary".into()));
            };
            doc["pmf"] = json!(otter_dwass_pmf(d, m.p(), n)?.to_vec());
        }
    }
    emit(&render_value(&doc, args.output.format)?, &args.output.out)?;
    Ok(ExitCode::SUCCESS)
}

fn suite_csv(r: &SuiteReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "empirical", "predicted", "rel_err", "verdict"])?;
    for c in &r.criteria {
        for k in &c.checks {
            let verdict = serde_json::to_value(k.verdict)?;
            w.write_record([
                format!("{}/{}", c.id, k.name),
                k.empirical.to_string(),
                k.predicted.to_string(),
                k.rel_err.to_string(),
                verdict.as_str().unwrap_or_default().to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let scale: SuiteScale = args.suite.parse()?;
    let report = run_suite(scale, args.seed, |c| eprintln!("{}", c.summary_line()))?;
    let text = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => suite_csv(&report)?,
    };
    emit(&text, &args.output.out)?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Theory(a) => theory(a),
        Command::Oracle(a) => oracle(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
