//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or validation errors, 2 on internal
//! invariant violations. Diagnostics go to standard error; data goes to
//! standard output or the `-o` file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::builders::{build_adaptive, build_static, parse_key_values, WeightModel};
use crate::circuit::generators::{Family, GeneratorSpec};
use crate::circuit::{
    circuit_from_json, circuit_to_json, parse_circuit_with, serialize_circuit, Circuit,
    ParseOptions,
};
use crate::hypergraph::{export_hmetis, incidence_matrix, Hypergraph};
use crate::partition::{
    compute_cut_size, is_admissible, partition, summary_row, Heuristic, PartitionConfig,
    PartitionResult, SUMMARY_COLUMNS,
};
use crate::report::{compare, rows_to_csv, rows_to_jsonl, suite_specs, sweep, ReportOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "hypaq",
    version,
    about = "Hypergraph partitioning for static and adaptive quantum circuits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a circuit and print it as IR JSON or normalized text.
    Parse(ParseArgs),
    /// Build the hypergraph of a circuit and export it.
    Hypergraph(HypergraphArgs),
    /// Partition a circuit's hypergraph across k QPUs.
    Partition(PartitionArgs),
    /// Static-vs-adaptive comparison rows for one circuit.
    Compare(CompareArgs),
    /// Comparison rows over benchmark families and size ladders.
    Sweep(SweepArgs),
    /// Emit a generated benchmark circuit.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircuitFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    /// Full hypergraph document.
    Json,
    /// One row per edge.
    Csv,
    /// hMETIS text with edge and vertex weights.
    Hmetis,
    /// Vertex-by-edge incidence matrix as CSV.
    Incidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Static for circuits without if/while, adaptive otherwise.
    Auto,
    Static,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResultFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file (standard output when omitted).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Weight-model / partition config file (`key = value` lines).
    #[arg(long, env = "HYPAQ_CONFIG", global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Circuit file (.qc text or IR .json) or generator spec such as `rus(n=8)`.
    pub input: String,
    #[arg(long, value_enum, default_value_t = CircuitFormat::Json)]
    pub format: CircuitFormat,
    /// Reject conditions on bits that no earlier measurement writes.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Do not fold control-flow blocks into super-group edges.
    #[arg(long)]
    pub no_grouping: bool,
}

#[derive(Debug, Args)]
pub struct HypergraphArgs {
    pub input: String,
    #[command(flatten)]
    pub build: BuildArgs,
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    pub format: GraphFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PartitionFlags {
    /// Number of blocks (QPUs) [default: 2]
    #[arg(short = 'k', long = "k")]
    pub k: Option<usize>,
    /// Balance penalty weight [default: 1.0]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Capacity tolerance fraction [default: 0.1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Maximum refinement passes [default: 20]
    #[arg(long)]
    pub max_passes: Option<usize>,
    /// Seed for FM restart splits [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refinement heuristic, fm or kl [default: fm]
    #[arg(long)]
    pub heuristic: Option<String>,
    /// Weight multiplier for cut conditional edges [default: 2.0]
    #[arg(long)]
    pub overhead_factor: Option<f64>,
    /// Rerun FM once with overhead-adjusted conditional weights.
    #[arg(long)]
    pub repartition_after_overhead: bool,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    pub input: String,
    #[command(flatten)]
    pub build: BuildArgs,
    #[command(flatten)]
    pub partition: PartitionFlags,
    #[arg(long, value_enum, default_value_t = ResultFormat::Json)]
    pub format: ResultFormat,
    /// Record wall-clock time in the CSV summary.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReportFlags {
    #[arg(long, value_enum, default_value_t = RowFormat::Csv)]
    pub format: RowFormat,
    /// Record wall-clock time per row.
    #[arg(long)]
    pub timing: bool,
    /// Multiplier for gates inside while bodies in total_gates.
    #[arg(long, default_value_t = 1)]
    pub expected_iterations: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub input: String,
    #[command(flatten)]
    pub partition: PartitionFlags,
    #[command(flatten)]
    pub report: ReportFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated families: qpe, iqpe, vqe, random, rus.
    #[arg(long, default_value = "qpe,iqpe,vqe,random,rus")]
    pub suite: String,
    /// Sizes as `start:end:step` or a comma list [default: each family's ladder]
    #[arg(long)]
    pub sizes: Option<String>,
    /// Seeds for the random family, `start:end` or a comma list.
    #[arg(long, default_value = "0:4")]
    pub seeds: String,
    /// Alias of --output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub partition: PartitionFlags,
    #[command(flatten)]
    pub report: ReportFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator spec, e.g. `rus(n=8)` or `random(n=6,depth=10,seed=3)`.
    pub spec: String,
    #[arg(long, value_enum, default_value_t = CircuitFormat::Text)]
    pub format: CircuitFormat,
    #[command(flatten)]
    pub common: Common,
}

struct Config {
    weights: WeightModel,
    partition: PartitionConfig,
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    let mut cfg = Config {
        weights: WeightModel::default(),
        partition: PartitionConfig::default(),
    };
    let Some(path) = path else { return Ok(cfg) };
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let at = |e: crate::builders::BuildError| input(format!("{}: {e}", path.display()));
    cfg.weights = WeightModel::from_config_str(&text).map_err(at)?;
    for (line, key, value) in parse_key_values(&text).map_err(at)? {
        let Some(name) = key.strip_prefix("partition.") else {
            continue;
        };
        let bad = || {
            input(format!(
                "{}: line {line}: bad value `{value}` for `{key}`",
                path.display()
            ))
        };
        let p = &mut cfg.partition;
        match name {
            "k" => p.k = value.parse().map_err(|_| bad())?,
            "lambda" => p.lambda = value.parse().map_err(|_| bad())?,
            "epsilon" => p.epsilon = value.parse().map_err(|_| bad())?,
            "max_passes" => p.max_passes = value.parse().map_err(|_| bad())?,
            "seed" => p.seed = value.parse().map_err(|_| bad())?,
            "heuristic" => p.heuristic = value.parse().map_err(|_| bad())?,
            "comm_overhead_factor" => p.comm_overhead_factor = value.parse().map_err(|_| bad())?,
            "repartition_after_overhead" => {
                p.repartition_after_overhead = value.parse().map_err(|_| bad())?
            }
            _ => {
                return Err(input(format!(
                    "{}: line {line}: unknown key `{key}`",
                    path.display()
                )))
            }
        }
    }
    Ok(cfg)
}

fn partition_config(
    base: &PartitionConfig,
    f: &PartitionFlags,
) -> Result<PartitionConfig, CliError> {
    let mut cfg = base.clone();
    if let Some(k) = f.k {
        cfg.k = k;
    }
    if let Some(l) = f.lambda {
        cfg.lambda = l;
    }
    if let Some(e) = f.epsilon {
        cfg.epsilon = e;
    }
    if let Some(m) = f.max_passes {
        cfg.max_passes = m;
    }
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
    if let Some(h) = &f.heuristic {
        cfg.heuristic = h
            .parse::<Heuristic>()
            .map_err(|e| input(format!("--heuristic: {e}")))?;
    }
    if let Some(o) = f.overhead_factor {
        cfg.comm_overhead_factor = o;
    }
    cfg.repartition_after_overhead |= f.repartition_after_overhead;
    cfg.validate()
        .map_err(|e| input(format!("partition flags: {e}")))?;
    Ok(cfg)
}

/// Reads a circuit file, or builds a generator spec when no such file
/// exists.
pub fn load_circuit(src: &str, strict: bool) -> Result<Circuit, CliError> {
    let path = Path::new(src);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| input(format!("{src}: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            return circuit_from_json(&text).map_err(|e| input(format!("{src}: {e}")));
        }
        return parse_circuit_with(&text, ParseOptions { strict })
            .map_err(|e| input(format!("{src}: {e}")));
    }
    if src.contains('(') || Family::ALL.iter().any(|f| f.name() == src) {
        let spec: GeneratorSpec = src.parse().map_err(|e| input(format!("{e}")))?;
        return spec.build().map_err(|e| input(format!("{src}: {e}")));
    }
    Err(input(format!(
        "{src}: no such file and not a generator spec"
    )))
}

fn resolve_mode(c: &Circuit, mode: ModeArg) -> ModeArg {
    match mode {
        ModeArg::Auto if c.has_adaptive_control_flow() => ModeArg::Adaptive,
        ModeArg::Auto => ModeArg::Static,
        m => m,
    }
}

fn build(
    c: &Circuit,
    wm: &WeightModel,
    b: &BuildArgs,
    src: &str,
) -> Result<(Hypergraph, &'static str), CliError> {
    let (g, name) = match resolve_mode(c, b.mode) {
        ModeArg::Static => (build_static(c, wm), "static"),
        _ => (build_adaptive(c, wm, !b.no_grouping), "adaptive"),
    };
    g.map(|g| (g, name))
        .map_err(|e| input(format!("{src}: {e}")))
}

fn edges_csv(g: &Hypergraph) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "id",
        "label",
        "kind",
        "weight",
        "pins",
        "condition",
        "probability",
        "layer",
        "active",
        "absorbed_by",
        "origin",
    ];
    w.write_record(header).expect("in-memory csv write");
    for e in &g.edges {
        let (cond, prob) = match &e.kind {
            crate::hypergraph::HyperedgeKind::Conditional {
                condition_label,
                probability,
                ..
            } => (condition_label.clone(), probability.to_string()),
            _ => (String::new(), String::new()),
        };
        let pins: Vec<&str> = e
            .pins
            .iter()
            .map(|&p| g.vertices[p].label.as_str())
            .collect();
        w.write_record([
            e.id.to_string(),
            e.label(),
            e.kind.name().to_string(),
            e.weight.to_string(),
            pins.join(" "),
            cond,
            prob,
            e.layer.map(|l| l.to_string()).unwrap_or_default(),
            e.is_active().to_string(),
            e.absorbed_by.map(|a| a.to_string()).unwrap_or_default(),
            e.origin.join(" "),
        ])
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

fn check_result(
    g: &Hypergraph,
    r: &PartitionResult,
    cfg: &PartitionConfig,
) -> Result<(), CliError> {
    let cut = compute_cut_size(g, &r.assignment).map_err(|e| CliError::Internal(e.to_string()))?;
    if (cut - r.cut_size).abs() > 1e-9 {
        return Err(CliError::Internal(format!(
            "reported cut {} != recomputed {cut}",
            r.cut_size
        )));
    }
    if !is_admissible(g, &r.assignment, cfg) {
        return Err(CliError::Internal(
            "assignment exceeds block capacity".into(),
        ));
    }
    if r.pass_history.windows(2).any(|w| w[1].1 > w[0].1 + 1e-9) {
        return Err(CliError::Internal("pass history increased".into()));
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn execute(cli: Cli) -> Result<(String, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Parse(a) => {
            let c = load_circuit(&a.input, a.strict)?;
            let out = match a.format {
                CircuitFormat::Json => circuit_to_json(&c),
                CircuitFormat::Text => serialize_circuit(&c),
            };
            Ok((with_newline(out), a.common.output))
        }
        Command::Generate(a) => {
            let spec: GeneratorSpec = a.spec.parse().map_err(|e| input(format!("{e}")))?;
            let c = spec
                .build()
                .map_err(|e| input(format!("{}: {e}", a.spec)))?;
            let out = match a.format {
                CircuitFormat::Json => circuit_to_json(&c),
                CircuitFormat::Text => serialize_circuit(&c),
            };
            Ok((with_newline(out), a.common.output))
        }
        Command::Hypergraph(a) => {
            let cfg = load_config(a.common.config.as_deref())?;
            let c = load_circuit(&a.input, false)?;
            let (g, _) = build(&c, &cfg.weights, &a.build, &a.input)?;
            let out = match a.format {
                GraphFormat::Json => g.to_json(),
                GraphFormat::Csv => edges_csv(&g),
                GraphFormat::Hmetis => export_hmetis(&g),
                GraphFormat::Incidence => incidence_matrix(&g).to_csv(),
            };
            Ok((with_newline(out), a.common.output))
        }
        Command::Partition(a) => {
            let cfg = load_config(a.common.config.as_deref())?;
            let pcfg = partition_config(&cfg.partition, &a.partition)?;
            let c = load_circuit(&a.input, false)?;
            let (g, mode) = build(&c, &cfg.weights, &a.build, &a.input)?;
            let start = Instant::now();
            let r = partition(&g, &pcfg).map_err(|e| input(format!("{}: {e}", a.input)))?;
            let elapsed = if a.timing {
                start.elapsed().as_millis()
            } else {
                0
            };
            check_result(&g, &r, &pcfg)?;
            let out = match a.format {
                ResultFormat::Json => r.to_json(&g),
                ResultFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(SUMMARY_COLUMNS)
                        .expect("in-memory csv write");
                    w.write_record(summary_row(&c.name, mode, &pcfg, &r, elapsed))
                        .expect("in-memory csv write");
                    String::from_utf8(w.into_inner().expect("in-memory csv flush"))
                        .expect("csv is utf-8")
                }
            };
            Ok((with_newline(out), a.common.output))
        }
        Command::Compare(a) => {
            let cfg = load_config(a.common.config.as_deref())?;
            let pcfg = partition_config(&cfg.partition, &a.partition)?;
            let c = load_circuit(&a.input, false)?;
            let opts = report_options(&a.report)?;
            let rows = compare(&c, &cfg.weights, &pcfg, &opts);
            Ok((format_rows(&rows, a.report.format), a.common.output))
        }
        Command::Sweep(a) => {
            let cfg = load_config(a.common.config.as_deref())?;
            let pcfg = partition_config(&cfg.partition, &a.partition)?;
            let opts = report_options(&a.report)?;
            let seeds = parse_list(&a.seeds, "--seeds", false)?;
            let sizes = a
                .sizes
                .as_deref()
                .map(|s| parse_list(s, "--sizes", true))
                .transpose()?
                .map(|v| v.into_iter().map(|x| x as usize).collect::<Vec<_>>());
            let mut specs = Vec::new();
            for name in a.suite.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let family: Family = name.parse().map_err(|e| input(format!("--suite: {e}")))?;
                let sizes = sizes.clone().unwrap_or_else(|| family.default_sizes());
                specs.extend(suite_specs(family, &sizes, &seeds));
            }
            if specs.is_empty() {
                return Err(input("--suite: no families given"));
            }
            let rows = sweep(&specs, &cfg.weights, &pcfg, &opts);
            Ok((
                format_rows(&rows, a.report.format),
                a.out.or(a.common.output),
            ))
        }
    }
}

fn report_options(r: &ReportFlags) -> Result<ReportOptions, CliError> {
    if r.expected_iterations == 0 {
        return Err(input("--expected-iterations must be positive"));
    }
    Ok(ReportOptions {
        timing: r.timing,
        expected_iterations: r.expected_iterations,
    })
}

fn format_rows(rows: &[crate::report::ComparisonRow], f: RowFormat) -> String {
    match f {
        RowFormat::Csv => rows_to_csv(rows),
        RowFormat::Jsonl => rows_to_jsonl(rows),
    }
}

/// `start:end[:step]` (inclusive) or a comma list.
pub fn parse_list(s: &str, flag: &str, with_step: bool) -> Result<Vec<u64>, CliError> {
    let bad = || input(format!("{flag}: cannot parse `{s}`"));
    if s.contains(':') {
        let parts: Vec<u64> = s
            .split(':')
            .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (*a, *b, 1),
            [a, b, c] if with_step => (*a, *b, *c),
            _ => return Err(bad()),
        };
        if step == 0 || start > end {
            return Err(bad());
        }
        return Ok((start..=end).step_by(step as usize).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

/// Runs one invocation, writing data to `out` (or the `-o` file) and
/// diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(cli)))
        .unwrap_or_else(|_| Err(CliError::Internal("unexpected panic".into())));
    match result {
        Ok((data, Some(path))) => match fs::write(&path, data) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                1
            }
        },
        Ok((data, None)) => {
            let _ = out.write_all(data.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
