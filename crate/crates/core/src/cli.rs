//! The `rumor` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, unreadable or
//! malformed input), 2 when a resource limit stops the computation. With
//! `--format json` errors are also reported as a JSON object on stderr.
//!
//! `--config FILE` reads a TOML file. Top-level keys set global flags and a
//! table named after the subcommand sets its flags; a flag given on the
//! command line always wins over the file.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analytics::{
    bessel_i0, extinction_series_binomial, extinction_series_poisson, prob_all_children_activated, yv_distribution,
    AnalyticsError, CandidateRole, ExtinctionSeries, TreeFamily, YvSpec,
};
use crate::cascade::{simulate, CascadeError, CascadeParams, CascadeSnapshot};
use crate::experiment::{
    format_p, run_sweep, tree_sweep, standard_p_grid, ExperimentError, ExperimentResult, ExperimentSpec,
    ReplicateTarget, TreeMode, TreeSweepSpec,
};
use crate::graph::{read_edge_list, read_id_list, write_edge_list, write_id_list, Graph, GraphError, GraphModel};
use crate::inference::{candidate_set, evaluate_run, CandidateResult, InferenceError};
use crate::likelihood::{
    exact_likelihood_with, mc_likelihood, posterior, EnumerationBudget, LikelihoodError, LikelihoodTable,
};
use crate::rng::stream_rng;
use crate::tree_sim::{TreeError, TreeKind, DEFAULT_NODE_BUDGET};

/// Environment variable that replaces the default output directory.
pub const OUT_DIR_ENV: &str = "RUMOR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "rumor",
    version,
    about = "Independent Cascade simulation and rumor source inference",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// TOML file with default flag values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file, or output directory for `experiment` and `replicate`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random network and write it as an edge list.
    Generate(GenerateArgs),
    /// Run one cascade on a network.
    Cascade(CascadeArgs),
    /// Estimate the source of an observed active set.
    Infer(InferArgs),
    /// Likelihood and posterior of every node as the source.
    Likelihood(LikelihoodArgs),
    /// Branching-process quantities.
    Analyze(AnalyzeArgs),
    /// Sweep over spreading probabilities and round counts.
    Experiment(ExperimentArgs),
    /// Regenerate one of the standard tables or figures.
    Replicate(ReplicateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelName {
    Er,
    Config,
    Rgg,
}

#[derive(Debug, Args)]
struct NetworkArgs {
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    n: Option<usize>,
    /// Erdős–Rényi mean degree.
    #[arg(long)]
    avg_degree: Option<f64>,
    /// Configuration-model degree.
    #[arg(long)]
    d: Option<usize>,
    /// Geometric-graph expected degree.
    #[arg(long)]
    expected_degree: Option<f64>,
}

impl NetworkArgs {
    fn model(&self) -> Result<GraphModel, CliError> {
        let model = self.model.ok_or_else(|| usage("--model is required"))?;
        let n = self.n.ok_or_else(|| usage("--n is required"))?;
        let model = match model {
            ModelName::Er => GraphModel::ErdosRenyi {
                n,
                avg_degree: self.avg_degree.ok_or_else(|| usage("--avg-degree is required for er"))?,
            },
            ModelName::Config => GraphModel::ConfigRegular {
                n,
                d: self.d.ok_or_else(|| usage("--d is required for config"))?,
            },
            ModelName::Rgg => GraphModel::Geometric {
                n,
                expected_degree: self
                    .expected_degree
                    .ok_or_else(|| usage("--expected-degree is required for rgg"))?,
            },
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CascadeArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    source: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    rounds: u32,
    #[arg(long)]
    seed: u64,
    /// Also write the final active set as an id list.
    #[arg(long)]
    active_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("observation").required(true).args(["active", "snapshot"]))]
struct InferArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Id-list file with the active set.
    #[arg(long)]
    active: Option<PathBuf>,
    /// Cascade snapshot JSON; supplies the active set, source and rounds.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// True source, for scoring the candidates.
    #[arg(long)]
    source: Option<usize>,
    /// Search radius; defaults to the snapshot's rounds, otherwise unbounded.
    #[arg(long)]
    depth_cap: Option<u32>,
    /// Accepted for uniformity; inference draws no random numbers.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LikelihoodMethod {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
struct LikelihoodArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Id-list file with the observed active set.
    #[arg(long)]
    active: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    rounds: u32,
    #[arg(long, value_enum, default_value_t = LikelihoodMethod::Exact)]
    method: LikelihoodMethod,
    /// Cascades per node for `--method mc`.
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Required for `--method mc`.
    #[arg(long)]
    seed: Option<u64>,
    /// Branch limit for exact enumeration.
    #[arg(long, default_value_t = EnumerationBudget::default().max_branches)]
    max_branches: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnalyzeKind {
    Binomial,
    Poisson,
    Bessel,
    AllChildren,
    Yv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoleName {
    Closest,
    Other,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    kind: AnalyzeKind,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Last index of the extinction series.
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Argument of the Bessel function.
    #[arg(long)]
    x: Option<f64>,
    /// Number of active subtrees; every admissible value when omitted.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    t_star: Option<usize>,
    #[arg(long, value_enum, default_value_t = RoleName::Closest)]
    role: RoleName,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TreeName {
    DRegular,
    GwPoisson,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TreeModeName {
    Aggregated,
    Materialized,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Run on an infinite tree instead of a finite network.
    #[arg(long, value_enum, conflicts_with = "model")]
    tree: Option<TreeName>,
    /// Offspring mean of the Poisson tree.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = TreeModeName::Aggregated)]
    tree_mode: TreeModeName,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Comma-separated probabilities; defaults to 0.00, 0.05, ..., 1.00.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Comma-separated observation rounds.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    rounds: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    runs: u32,
    #[arg(long)]
    seed: u64,
    /// Reuse one network for all runs.
    #[arg(long)]
    fixed_graph: bool,
    /// Probabilities whose distance histograms are written.
    #[arg(long, value_delimiter = ',')]
    histogram_p: Vec<f64>,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    #[arg(value_parser = ["table1", "table2", "table3", "fig3", "fig4"])]
    target: String,
    #[arg(long)]
    seed: u64,
    /// Fewer runs than the standard 100, for quick checks.
    #[arg(long)]
    runs: Option<u32>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Resource(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Resource(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Resource(_) => "resource",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Resource(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        usage(e.to_string())
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        usage(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        usage(e.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        usage(e.to_string())
    }
}

impl From<LikelihoodError> for CliError {
    fn from(e: LikelihoodError) -> Self {
        match e {
            LikelihoodError::BudgetExceeded { .. } => CliError::Resource(e.to_string()),
            _ => usage(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::NodeBudgetExceeded { .. } => {
                CliError::Resource(format!("{e}; raise --node-budget or use --tree-mode aggregated"))
            }
            _ => usage(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Tree(t) => t.into(),
            _ => usage(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    usage(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_errors = wants_json(&args);
    let outcome = merge_config(args).and_then(|args| match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                let _ = e.print();
                Ok(None)
            }
            _ => Err(e),
        }
        .map_err(|e| usage(e.render().to_string())),
    });
    let result = match outcome {
        Ok(None) => return 0,
        Ok(Some(cli)) => dispatch(&cli),
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            if json_errors {
                let body = json!({ "error": e.kind(), "message": e.message(), "exit_code": e.exit_code() });
                eprintln!("{body}");
            } else {
                eprintln!("{}", e.message().trim_end());
            }
            e.exit_code()
        }
    }
}

fn wants_json(args: &[OsString]) -> bool {
    args.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || args.iter().any(|a| a == "--format=json")
}

const SUBCOMMANDS: [&str; 7] = ["generate", "cascade", "infer", "likelihood", "analyze", "experiment", "replicate"];

/// Appends flags from the `--config` file that the command line does not set.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config_path = None;
    for (i, arg) in args.iter().enumerate() {
        let Some(s) = arg.to_str() else { continue };
        if s == "--config" {
            config_path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| usage(format!("{}: {e}", path.display())))?;
    let subcommand = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| SUBCOMMANDS.contains(a))
        .map(str::to_owned);
    let given = |args: &[OsString], flag: &str| {
        args.iter()
            .filter_map(|a| a.to_str())
            .any(|a| a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) => {
                if subcommand.as_deref() != Some(key.as_str()) {
                    continue;
                }
                for (k, v) in section {
                    push_flag(&mut extra, k, v, |f| given(&args, f))?;
                }
            }
            v => push_flag(&mut extra, key, v, |f| given(&args, f))?,
        }
    }
    args.extend(extra);
    Ok(args)
}

fn push_flag(
    extra: &mut Vec<OsString>,
    key: &str,
    value: &toml::Value,
    given: impl Fn(&str) -> bool,
) -> Result<(), CliError> {
    if key == "config" {
        return Ok(());
    }
    let flag = format!("--{}", key.replace('_', "-"));
    if given(&flag) {
        return Ok(());
    }
    let scalar = |v: &toml::Value| -> Result<String, CliError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            _ => Err(usage(format!("config key `{key}` has an unsupported value"))),
        }
    };
    match value {
        toml::Value::Boolean(true) => extra.push(flag.into()),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
            extra.push(flag.into());
            extra.push(joined.into());
        }
        v => {
            extra.push(flag.into());
            extra.push(scalar(v)?.into());
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate(a) => generate(a, cli.format, out),
        Command::Cascade(a) => cascade(a, cli.format, out),
        Command::Infer(a) => infer(a, cli.format, out),
        Command::Likelihood(a) => likelihood(a, cli.format, out),
        Command::Analyze(a) => analyze(a, cli.format, out),
        Command::Experiment(a) => experiment(a, cli.format, out),
        Command::Replicate(a) => replicate(a, cli.format, out),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_edge_list(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_ids(path: &Path) -> Result<Vec<usize>, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_id_list(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn out_dir(out: Option<&Path>, default: &str) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn generate(a: &GenerateArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let model = a.network.model()?;
    let g = model.generate(&mut stream_rng(a.seed, 0))?;
    let text = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).expect("writing to memory");
            String::from_utf8(buf).expect("ascii")
        }
        Format::Json => to_json(&json!({
            "node_count": g.node_count(),
            "edges": g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>(),
        })),
    };
    emit(out, &text)
}

fn cascade(a: &CascadeArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let params = CascadeParams::new(a.p, a.rounds)?;
    let snapshot = simulate(&g, a.source, &params, &mut stream_rng(a.seed, 0))?;
    if let Some(path) = &a.active_out {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        write_id_list(&snapshot.active, file).map_err(|e| io_error(path, e))?;
    }
    let text = match format {
        Format::Json => to_json(&snapshot),
        Format::Csv => {
            let mut s = String::from("round,node\n");
            for (round, frontier) in snapshot.history.iter().enumerate() {
                for v in frontier {
                    s.push_str(&format!("{round},{v}\n"));
                }
            }
            s
        }
    };
    emit(out, &text)
}

#[derive(Serialize)]
struct InferReport {
    status: crate::inference::CandidateStatus,
    t_prime: Option<u32>,
    candidates: Vec<usize>,
    representative: Option<usize>,
    classification: Option<crate::inference::Classification>,
    avg_distance: Option<f64>,
    max_distance: Option<u32>,
}

fn infer(a: &InferArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let snapshot: Option<CascadeSnapshot> = match &a.snapshot {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            Some(serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let active = match (&a.active, &snapshot) {
        (Some(path), _) => load_ids(path)?,
        (None, Some(s)) => s.active.clone(),
        (None, None) => unreachable!("clap requires one observation"),
    };
    let cap = a.depth_cap.or(snapshot.as_ref().map(|s| s.rounds));
    let result: CandidateResult = candidate_set(&g, &active, cap)?;
    let source = a.source.or(snapshot.as_ref().map(|s| s.source));
    let outcome = match source {
        Some(source) => {
            g.check_node(source)?;
            let observed = CascadeSnapshot {
                source,
                rounds: snapshot.as_ref().map_or(0, |s| s.rounds),
                active: sorted_ids(&active),
                informed: Vec::new(),
                history: Vec::new(),
            };
            Some(evaluate_run(&g, &observed, &result))
        }
        None => None,
    };
    let report = InferReport {
        status: result.status,
        t_prime: result.t_prime,
        representative: result.representative(),
        classification: outcome.as_ref().map(|o| o.classification),
        avg_distance: outcome.as_ref().and_then(|o| o.avg_distance),
        max_distance: outcome.as_ref().and_then(|o| o.max_distance),
        candidates: result.candidates.clone(),
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = format!(
                "# t_prime={}\ncandidate,distance_to_source\n",
                report.t_prime.map_or("-".into(), |t| t.to_string())
            );
            for (i, c) in result.candidates.iter().enumerate() {
                let d = outcome
                    .as_ref()
                    .map_or("-".to_string(), |o| o.candidate_distances[i].to_string());
                s.push_str(&format!("{c},{d}\n"));
            }
            s
        }
    };
    emit(out, &text)
}

fn sorted_ids(active: &[usize]) -> Vec<usize> {
    let mut v = active.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn likelihood(a: &LikelihoodArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let target = load_ids(&a.active)?;
    CascadeParams::new(a.p, a.rounds)?;
    let values: Vec<f64> = match a.method {
        LikelihoodMethod::Exact => {
            let budget = EnumerationBudget {
                max_branches: a.max_branches,
                ..EnumerationBudget::default()
            };
            (0..g.node_count())
                .map(|v| exact_likelihood_with(&g, &target, v, a.p, a.rounds, budget))
                .collect::<Result<_, _>>()?
        }
        LikelihoodMethod::Mc => {
            let seed = a.seed.ok_or_else(|| usage("--seed is required for --method mc"))?;
            (0..g.node_count())
                .map(|v| {
                    mc_likelihood(&g, &target, v, a.p, a.rounds, a.runs, &mut stream_rng(seed, v as u64))
                        .map(|e| e.estimate)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let table = LikelihoodTable {
        p: a.p,
        rounds: a.rounds,
        target: sorted_ids(&target),
        values,
    };
    let post = posterior(&table)?;
    let mut order: Vec<usize> = (0..post.len()).collect();
    order.sort_by(|&x, &y| post[y].total_cmp(&post[x]).then(x.cmp(&y)));
    let text = match format {
        Format::Json => to_json(
            &order
                .iter()
                .map(|&v| json!({ "node": v, "likelihood": table.values[v], "posterior": post[v] }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut s = String::from("node,likelihood,posterior\n");
            for &v in &order {
                s.push_str(&format!("{v},{},{}\n", table.values[v], post[v]));
            }
            s
        }
    };
    emit(out, &text)
}

fn series_output(series: &ExtinctionSeries, format: Format) -> String {
    match format {
        Format::Json => to_json(series),
        Format::Csv => {
            let mut s = String::from("t,x_t\n");
            for (t, x) in series.values.iter().enumerate() {
                s.push_str(&format!("{t},{x}\n"));
            }
            s.push_str(&format!(
                "# fixed_point={},iterations_to_tol={}\n",
                series.fixed_point, series.iterations_to_tol
            ));
            s
        }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("--{flag} is required for this kind")))
}

fn analyze(a: &AnalyzeArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = match a.kind {
        AnalyzeKind::Binomial => {
            series_output(&extinction_series_binomial(need(a.d, "d")?, need(a.p, "p")?, a.steps)?, format)
        }
        AnalyzeKind::Poisson => {
            let mu = match (a.mu, a.lambda, a.p) {
                (Some(mu), _, _) => mu,
                (None, Some(lambda), Some(p)) => lambda * p,
                _ => return Err(usage("--mu (or --lambda with --p) is required for poisson")),
            };
            series_output(&extinction_series_poisson(mu, a.steps)?, format)
        }
        AnalyzeKind::Bessel => {
            let x = need(a.x, "x")?;
            let value = bessel_i0(x)?;
            match format {
                Format::Json => to_json(&json!({
                    "x": x,
                    "value": if value.is_log() { None } else { Some(value.value()) },
                    "ln_value": value.ln(),
                    "log_scale": value.is_log(),
                })),
                Format::Csv => format!(
                    "x,i0,ln_i0\n{x},{},{}\n",
                    if value.is_log() { "-".to_string() } else { value.value().to_string() },
                    value.ln()
                ),
            }
        }
        AnalyzeKind::AllChildren => {
            let (lambda, p) = (need(a.lambda, "lambda")?, need(a.p, "p")?);
            let prob = prob_all_children_activated(lambda, p)?;
            match format {
                Format::Json => to_json(&json!({ "lambda": lambda, "p": p, "probability": prob })),
                Format::Csv => format!("lambda,p,probability\n{lambda},{p},{prob}\n"),
            }
        }
        AnalyzeKind::Yv => analyze_yv(a, format)?,
    };
    emit(out, &text)
}

fn analyze_yv(a: &AnalyzeArgs, format: Format) -> Result<String, CliError> {
    let p = need(a.p, "p")?;
    let t_star = need(a.t_star, "t-star")?;
    let steps = t_star.saturating_sub(1);
    let (family, series) = match (a.d, a.lambda) {
        (Some(d), None) => (TreeFamily::DRegular { d }, extinction_series_binomial(d, p, steps)?),
        (None, Some(lambda)) => (TreeFamily::GwPoisson { lambda }, extinction_series_poisson(lambda * p, steps)?),
        _ => return Err(usage("exactly one of --d and --lambda is required for yv")),
    };
    let role = match a.role {
        RoleName::Closest => CandidateRole::ClosestCandidate,
        RoleName::Other => CandidateRole::OtherCandidate,
    };
    let ks: Vec<u32> = match (a.k, role, family) {
        (Some(k), _, _) => vec![k],
        (None, CandidateRole::OtherCandidate, _) => vec![1],
        (None, _, TreeFamily::DRegular { d }) => (0..=d).collect(),
        (None, _, TreeFamily::GwPoisson { lambda }) => (0..=(lambda * p * 3.0).ceil() as u32 + 10).collect(),
    };
    let rows = ks
        .iter()
        .map(|&k| {
            let spec = YvSpec { family, p, k, t_star, role };
            yv_distribution(&spec, &series).map(|prob| (k, prob))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|&(k, prob)| json!({ "k": k, "probability": prob }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut s = String::from("k,probability\n");
            for (k, prob) in rows {
                s.push_str(&format!("{k},{prob}\n"));
            }
            s
        }
    })
}

fn experiment(a: &ExperimentArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let p_grid = a.p_grid.clone().unwrap_or_else(standard_p_grid);
    if let Some(tree) = a.tree {
        let kind = match tree {
            TreeName::DRegular => TreeKind::DRegular {
                d: need(a.network.d, "d")? as u32,
            },
            TreeName::GwPoisson => TreeKind::GwPoisson {
                lambda: need(a.lambda, "lambda")?,
            },
        };
        let &[rounds] = a.rounds.as_slice() else {
            return Err(usage("tree experiments take a single --rounds value"));
        };
        let mode = match a.tree_mode {
            TreeModeName::Aggregated => TreeMode::Aggregated,
            TreeModeName::Materialized => TreeMode::Materialized {
                node_budget: a.node_budget,
            },
        };
        let spec = TreeSweepSpec {
            kind,
            p_grid,
            rounds,
            runs: a.runs,
            master_seed: a.seed,
            mode,
        };
        let result = tree_sweep(&spec)?;
        return match out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                write_file(dir, "tree_summary.csv", &result.summary_csv())?;
                write_file(dir, "tree_runs.csv", &result.runs_csv())?;
                write_file(dir, "tree_summary.json", &to_json(&result.rows))?;
                Ok(())
            }
            None => emit(
                None,
                &match format {
                    Format::Json => to_json(&result.rows),
                    Format::Csv => result.summary_csv(),
                },
            ),
        };
    }
    let spec = ExperimentSpec {
        model: a.network.model()?,
        p_grid,
        rounds: a.rounds.clone(),
        runs: a.runs,
        master_seed: a.seed,
        fixed_graph: a.fixed_graph,
    };
    if let Some(p) = a.histogram_p.iter().find(|p| !spec.p_grid.contains(p)) {
        return Err(usage(format!("--histogram-p {p} is not on the p grid")));
    }
    let result = run_sweep(&spec)?;
    match out.map(Path::to_path_buf).or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)) {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
            write_experiment_files(&dir, "", &result, &a.histogram_p)?;
            Ok(())
        }
        None => {
            let text = match format {
                Format::Json => to_json(&summary_json(&result)),
                Format::Csv => {
                    let mut s = String::new();
                    for table in &result.tables {
                        if result.tables.len() > 1 {
                            s.push_str(&format!("# t={}\n", table.rounds));
                        }
                        s.push_str(&table.to_csv());
                    }
                    s
                }
            };
            emit(None, &text)
        }
    }
}

fn summary_json(result: &ExperimentResult) -> serde_json::Value {
    json!({
        "spec": result.spec,
        "tables": result.tables.iter().map(|t| json!({ "rounds": t.rounds, "rows": t.rows })).collect::<Vec<_>>(),
    })
}

/// Writes summary CSVs, the JSON run log and the requested histograms.
fn write_experiment_files(
    dir: &Path,
    prefix: &str,
    result: &ExperimentResult,
    histogram_ps: &[f64],
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let single = result.tables.len() == 1;
    for table in &result.tables {
        let name = match (prefix.is_empty(), single) {
            (false, true) => format!("{prefix}.csv"),
            (false, false) => format!("{prefix}_t{}.csv", table.rounds),
            (true, _) => format!("summary_t{}.csv", table.rounds),
        };
        written.push(write_file(dir, &name, &table.to_csv())?);
        for &p in histogram_ps {
            let hist = table.histogram(p).expect("p checked against the grid");
            let name = match (prefix.is_empty(), single) {
                (false, true) => format!("{prefix}_p{}.hist", format_p(p)),
                (false, false) => format!("{prefix}_t{}_p{}.hist", table.rounds, format_p(p)),
                (true, _) => format!("hist_t{}_p{}.txt", table.rounds, format_p(p)),
            };
            written.push(write_file(dir, &name, &hist.to_text(p, table.rounds))?);
        }
    }
    let base = if prefix.is_empty() { "summary".to_string() } else { format!("{prefix}_summary") };
    written.push(write_file(dir, &format!("{base}.json"), &to_json(&summary_json(result)))?);
    let runs = if prefix.is_empty() { "runs.json".to_string() } else { format!("{prefix}_runs.json") };
    written.push(write_file(dir, &runs, &to_json(&result.runs))?);
    Ok(written)
}

fn replicate(a: &ReplicateArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let target = ReplicateTarget::parse(&a.target).ok_or_else(|| usage(format!("unknown target {}", a.target)))?;
    let mut spec = target.spec(a.seed);
    if let Some(runs) = a.runs {
        spec.runs = runs;
    }
    let dir = out_dir(out, "results");
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let result = run_sweep(&spec)?;
    let written = write_experiment_files(&dir, target.name(), &result, target.histogram_ps())?;
    let names: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    let text = match format {
        Format::Json => to_json(&json!({ "target": target.name(), "files": names })),
        Format::Csv => names.iter().map(|n| format!("{n}\n")).collect(),
    };
    emit(None, &text)
}
