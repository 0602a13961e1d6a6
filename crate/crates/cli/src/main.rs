use std::fs;
use std::io::{self, Write};
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stable_knapsack::dynamic::{decremental_simulate, stream_simulate, RecourseReport};
use stable_knapsack::instances::{gen_lowerbound, gen_prop2, gen_random, read_instance, Dist, RandomSpec};
use stable_knapsack::sensitivity::{deterministic_sensitivity, mc_sensitivity_upper, SensitivityReport};
use stable_knapsack::{derive_seed, tolerance, Algorithm, AlgorithmKind, Error, Instance, SeededSource};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "stable-knapsack", version, about = "Knapsack algorithms with low average sensitivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on an instance file.
    Solve(SolveArgs),
    /// Measure average sensitivity under single-item deletions.
    Sensitivity(SensitivityArgs),
    /// Simulate an item stream and account recourse.
    Stream(StreamArgs),
    /// Write a generated instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct Common {
    /// Instance file (JSON).
    instance: PathBuf,
    #[arg(long, default_value = "stable")]
    alg: AlgorithmKind,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Seed for all randomness; drawn from the OS when omitted and echoed in the output.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Incr,
    Decr,
}

#[derive(Args)]
struct StreamArgs {
    /// Instance file (JSON).
    instance: PathBuf,
    #[arg(long, default_value = "fpras")]
    alg: AlgorithmKind,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "incr")]
    mode: Mode,
    /// Number of independent streams, stream `s` seeded by `derive_seed(seed, [s])`.
    #[arg(long, default_value_t = 1)]
    streams: usize,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Prop2,
    Lowerbound,
    Random,
    SimpleRandom,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Size parameter of the prop2 family.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Epsilon of the lower-bound family.
    #[arg(long, default_value_t = 0.04)]
    eps: f64,
    /// Item count of the random families.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// `uniform:LO:HI` or `pareto:ALPHA`.
    #[arg(long, default_value = "uniform:0:1", value_parser = parse_dist)]
    values: Dist,
    /// `uniform:LO:HI` or `pareto:ALPHA` (Pareto weights are used as `1/x`).
    #[arg(long, default_value = "uniform:0:1", value_parser = parse_dist)]
    weights: Dist,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dist(s: &str) -> Result<Dist, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        ["uniform", lo, hi] => Ok(Dist::Uniform { lo: num(lo)?, hi: num(hi)? }),
        ["pareto", alpha] => Ok(Dist::Pareto { alpha: num(alpha)? }),
        _ => Err(format!("expected uniform:LO:HI or pareto:ALPHA, got {s:?}")),
    }
}

/// Failures mapped to exit codes.
enum Failure {
    Input(String),
    Precondition(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Precondition(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Precondition(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) => Failure::Input(e.to_string()),
            Error::Domain(_) | Error::Size { .. } => Failure::Precondition(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = tolerance::init_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = panic::catch_unwind(|| match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sensitivity(a) => sensitivity(a),
        Command::Stream(a) => stream(a),
        Command::Gen(a) => gen(a),
    });
    let result = outcome.unwrap_or_else(|_| Err(Failure::Internal("internal error (panic)".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn set_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Precondition("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    Ok(())
}

fn algorithm(kind: AlgorithmKind, eps: f64) -> CliResult<Algorithm> {
    Ok(kind.with_eps(eps)?)
}

/// `eps` as shown in reports: absent for algorithms without a parameter.
fn eps_field(alg: &Algorithm, eps: f64) -> Option<f64> {
    match alg.kind() {
        AlgorithmKind::Greedy | AlgorithmKind::BruteForce => None,
        _ => Some(eps),
    }
}

fn emit(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Internal(e.to_string()))
        }
    }
}

fn solve(args: SolveArgs) -> CliResult<()> {
    let c = args.common;
    let instance = read_instance(&c.instance)?;
    let alg = algorithm(c.alg, c.eps)?;
    let seed = resolve_seed(c.seed);
    let run = alg.run(&instance, &mut SeededSource::new(seed))?;
    if !instance.is_feasible(&run.solution) {
        return Err(Failure::Internal("algorithm returned an infeasible solution".into()));
    }
    let value = instance.value_of(&run.solution)?;
    let weight = instance.weight_of(&run.solution)?;
    let text = if args.json {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "solve",
            "algorithm": alg.kind().name(),
            "eps": eps_field(&alg, c.eps),
            "seed": seed,
            "solution": run.solution,
            "value": value,
            "weight": weight,
            "transcript": run.transcript,
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
    } else {
        let ids: Vec<String> = run.solution.iter().map(|id| id.to_string()).collect();
        let mut t = format!(
            "algorithm: {}\nseed: {seed}\nids: {}\nvalue: {value}\nweight: {weight}\n",
            alg.kind(),
            ids.join(" ")
        );
        for e in run.transcript.entries() {
            t.push_str(&format!("draw {}: {}\n", e.stage.label(), serde_json::to_string(&e.draw).expect("json")));
        }
        t
    };
    emit(&text, None)
}

#[derive(Serialize)]
struct SensitivityRow {
    schema_version: u32,
    id: u64,
    estimate: f64,
    ci_halfwidth: f64,
    trials: usize,
}

fn sensitivity(args: SensitivityArgs) -> CliResult<()> {
    set_threads(args.threads)?;
    let c = args.common;
    let instance = read_instance(&c.instance)?;
    let alg = algorithm(c.alg, c.eps)?;
    let seed = resolve_seed(c.seed);
    let report: SensitivityReport = if alg.is_deterministic() {
        deterministic_sensitivity(&alg, &instance)?
    } else {
        mc_sensitivity_upper(&alg, &instance, args.trials, seed)?
    };
    let text = match args.out {
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "sensitivity",
                "algorithm": alg.kind().name(),
                "eps": eps_field(&alg, c.eps),
                "seed": seed,
                "report": report,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        Format::Csv => csv_text(report.per_deletion.iter().map(|d| SensitivityRow {
            schema_version: SCHEMA_VERSION,
            id: d.id.0,
            estimate: d.estimate,
            ci_halfwidth: d.ci_halfwidth,
            trials: d.trials,
        }))?,
    };
    emit(&text, args.output.as_deref())
}

#[derive(Serialize)]
struct StreamRow {
    schema_version: u32,
    stream: usize,
    step: usize,
    hamming: usize,
    value: f64,
    fopt_ref: f64,
    wall_time_secs: f64,
}

fn stream(args: StreamArgs) -> CliResult<()> {
    use rayon::prelude::*;

    set_threads(args.threads)?;
    if args.streams == 0 {
        return Err(Failure::Precondition("--streams must be at least 1".into()));
    }
    let instance: Instance = read_instance(&args.instance)?;
    let alg = algorithm(args.alg, args.eps)?;
    let seed = resolve_seed(args.seed);
    let simulate = match args.mode {
        Mode::Incr => stream_simulate,
        Mode::Decr => decremental_simulate,
    };
    let reports: Vec<RecourseReport> = (0..args.streams as u64)
        .into_par_iter()
        .map(|s| simulate(&instance, &alg, derive_seed(seed, &[s]), None).map(|log| log.report))
        .collect::<Result<_, _>>()?;
    let text = match args.out {
        Format::Json => {
            let mean = reports.iter().map(|r| r.amortized_recourse).sum::<f64>() / reports.len() as f64;
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "stream",
                "algorithm": alg.kind().name(),
                "eps": eps_field(&alg, args.eps),
                "seed": seed,
                "mode": match args.mode { Mode::Incr => "incr", Mode::Decr => "decr" },
                "mean_amortized_recourse": mean,
                "streams": reports,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        Format::Csv => csv_text(reports.iter().enumerate().flat_map(|(s, r)| {
            r.per_step.iter().map(move |p| StreamRow {
                schema_version: SCHEMA_VERSION,
                stream: s,
                step: p.step,
                hamming: p.hamming,
                value: p.value,
                fopt_ref: p.fopt_ref,
                wall_time_secs: p.wall_time_secs,
            })
        }))?,
    };
    emit(&text, args.output.as_deref())
}

fn csv_text<R: Serialize>(rows: impl IntoIterator<Item = R>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn gen(args: GenArgs) -> CliResult<()> {
    let seed = resolve_seed(args.seed);
    let instance = match args.family {
        Family::Prop2 => gen_prop2(args.k)?,
        Family::Lowerbound => gen_lowerbound(args.eps)?,
        Family::Random | Family::SimpleRandom => {
            let spec = RandomSpec {
                n: args.n,
                values: args.values,
                weights: args.weights,
                simple: args.family == Family::SimpleRandom,
            };
            gen_random(&spec, seed)?
        }
    };
    let mut text = stable_knapsack::instances::instance_to_json(&instance);
    text.push('\n');
    if matches!(args.family, Family::Random | Family::SimpleRandom) {
        eprintln!("seed: {seed}");
    }
    emit(&text, args.out.as_deref())
}
