use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gwhk_core::anneal::{
    annealed_run, default_window, event_frequencies, fit_decay, Estimator, Event, ExperimentConfig, QMode, ZSchedule,
};
use gwhk_core::isolation::{decompose_islands, DecompositionExport, IslandDecomposition};
use gwhk_core::lumped::LumpedTree;
use gwhk_core::ocean::build_ocean_weights;
use gwhk_core::rational::{format_rational, parse_rational};
use gwhk_core::spectral::heat_kernel_series;
use gwhk_core::{io, verify, Error, OffspringDistribution, Rational, ReturnSeries, RootedTree, TreeSampleSpec};

#[derive(Parser)]
#[command(name = "gwhk", version, about = "Random walks on Galton-Watson trees")]
struct Cli {
    /// Worker threads for ensemble commands. Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one Galton-Watson tree and print it in gwtree format.
    SampleTree(SampleTreeArgs),
    /// Island decomposition of a tree as JSON.
    Islands(IsolationArgs),
    /// Weighted ocean graph of a tree as JSON.
    OceanChain(OceanArgs),
    /// Exact return probabilities of a walk on a fixed tree.
    HeatKernel(HeatKernelArgs),
    /// Annealed return probabilities over an ensemble of trees.
    Anneal(AnnealArgs),
    /// Frequencies of the bad events F, M or D.
    Events(EventsArgs),
    /// Fit `log(-log R_t) = log c + beta log t` to a returns file.
    Fit(FitArgs),
    /// Run the property suite; exits with status 3 on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleTreeArgs {
    #[arg(long)]
    dist: String,
    #[arg(long)]
    depth: u32,
    #[arg(long, env = "GWHK_SEED", value_parser = parse_seed, default_value = "0")]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Condition on reaching the depth cap.
    #[arg(long)]
    survival: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct IsolationArgs {
    /// Tree in gwtree format.
    #[arg(long)]
    tree: PathBuf,
    /// Isolation parameter, e.g. `1/2`.
    #[arg(long, conflicts_with = "h")]
    q: Option<String>,
    /// Use `q = 2h/3`.
    #[arg(long)]
    h: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OceanArgs {
    #[command(flatten)]
    isolation: IsolationArgs,
    /// Decomposition JSON from `islands`; recomputed when omitted.
    #[arg(long)]
    decomposition: Option<PathBuf>,
}

#[derive(Args)]
struct HeatKernelArgs {
    /// Tree in gwtree format.
    #[arg(long, required_unless_present = "regular", conflicts_with = "regular")]
    tree: Option<PathBuf>,
    /// Use the complete tree of this arity instead of a file.
    #[arg(long)]
    regular: Option<u32>,
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Number of walk steps.
    #[arg(long)]
    steps: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Walks,
    Auto,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config, or any file written by `anneal` or `events`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    tmax: Option<u32>,
    #[arg(long)]
    trees: Option<u64>,
    #[arg(long, env = "GWHK_SEED", value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long)]
    h: Option<String>,
    /// Fixed isolation parameter.
    #[arg(long, conflicts_with = "q_schedule")]
    q: Option<String>,
    /// Use the shrinking schedule `q_t`.
    #[arg(long)]
    q_schedule: bool,
    /// Constant `z`.
    #[arg(long, conflicts_with_all = ["c3", "k"])]
    z: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    margin: Option<u32>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    #[arg(long)]
    walks: Option<u32>,
}

#[derive(Args)]
struct AnnealArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EventsArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// F, M or D.
    #[arg(long)]
    event: Event,
    /// Comma separated times; `1..=tmax` when omitted.
    #[arg(long, value_delimiter = ',')]
    ts: Option<Vec<u32>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FitArgs {
    /// Returns CSV written by `anneal` or `heat-kernel`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, requires = "t_hi")]
    t_lo: Option<u32>,
    #[arg(long, requires = "t_lo")]
    t_hi: Option<u32>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    Small,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "small")]
    corpus: CorpusArg,
    #[arg(long, env = "GWHK_SEED", value_parser = parse_seed, default_value = "1")]
    seed: u64,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDistribution(_) | Error::InvalidParameter(_) | Error::Parse { .. } => {
                Failure::Config(e.to_string())
            }
            e => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn config_err(e: impl Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sample_tree_cmd(args: SampleTreeArgs) -> CliResult<()> {
    let spec = TreeSampleSpec {
        dist: OffspringDistribution::parse(&args.dist)?,
        depth_cap: args.depth,
        survival_required: args.survival,
        master_seed: args.seed,
        sample_index: args.index,
    };
    let tree = gwhk_core::sample_tree(&spec)?;
    let config = json!({
        "command": "sample-tree",
        "dist": args.dist,
        "depth_cap": args.depth,
        "master_seed": args.seed,
        "sample_index": args.index,
        "survival_required": args.survival,
    });
    emit(args.output.out.as_deref(), &format!("{}{}", io::header_line(&config), tree.serialize()))
}

fn isolation_input(args: &IsolationArgs) -> CliResult<(RootedTree, Rational, Value)> {
    let tree = RootedTree::parse_relaxed(&read_file(&args.tree)?)?;
    let q = match (&args.q, &args.h) {
        (Some(q), _) => parse_rational(q)?,
        (None, Some(h)) => parse_rational(h)? * Rational::new(2, 3),
        (None, None) => return Err(Failure::Config("one of --q or --h is required".into())),
    };
    let config = json!({ "tree": args.tree.display().to_string(), "q": format_rational(&q) });
    Ok((tree, q, config))
}

fn with_command(mut config: Value, command: &str) -> Value {
    config["command"] = json!(command);
    config
}

fn islands_cmd(args: IsolationArgs) -> CliResult<()> {
    let (tree, q, config) = isolation_input(&args)?;
    let decomp = decompose_islands(&tree, q)?;
    let payload = serde_json::to_value(decomp.to_export()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = io::json_with_config(payload, &with_command(config, "islands"))?;
    emit(args.output.out.as_deref(), &format!("{text}\n"))
}

fn ocean_cmd(args: OceanArgs) -> CliResult<()> {
    let (tree, q, mut config) = isolation_input(&args.isolation)?;
    let decomp = match &args.decomposition {
        Some(path) => {
            let (_, body) = io::read_json_with_config(&read_file(path)?)?;
            let export: DecompositionExport = serde_json::from_value(body).map_err(config_err)?;
            let d = IslandDecomposition::from_export(&tree, &export)?;
            if d.q() != q {
                return Err(Failure::Config(format!(
                    "decomposition was computed for q = {}, not {}",
                    export.q,
                    format_rational(&q)
                )));
            }
            config["decomposition"] = json!(path.display().to_string());
            d
        }
        None => decompose_islands(&tree, q)?,
    };
    let w = build_ocean_weights(&tree, &decomp)?;
    let payload = serde_json::to_value(w.to_export()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = io::json_with_config(payload, &with_command(config, "ocean-chain"))?;
    emit(args.isolation.output.out.as_deref(), &format!("{text}\n"))
}

fn heat_kernel_cmd(args: HeatKernelArgs) -> CliResult<()> {
    let (series, source) = match (&args.tree, args.regular) {
        (Some(path), _) => {
            let tree = RootedTree::parse(&read_file(path)?)?;
            (heat_kernel_series(&tree, args.start, args.steps)?, json!({ "tree": path.display().to_string() }))
        }
        (None, Some(arity)) => {
            if args.start != 0 {
                return Err(Failure::Config("--regular only supports --start 0".into()));
            }
            if arity == 0 {
                return Err(Failure::Config("--regular needs a positive arity".into()));
            }
            let lumped = LumpedTree::regular(arity, args.steps.div_ceil(2));
            (ReturnSeries::exact(&lumped.return_series(args.steps)?), json!({ "regular": arity }))
        }
        (None, None) => return Err(Failure::Config("one of --tree or --regular is required".into())),
    };
    let mut config = with_command(source, "heat-kernel");
    config["start"] = json!(args.start);
    config["steps"] = json!(args.steps);
    emit(args.output.out.as_deref(), &io::write_returns_csv(&series, &config))
}

/// Reads an experiment config from a plain JSON config, a JSON artifact or
/// the header of a CSV artifact.
fn load_experiment(path: &Path) -> CliResult<ExperimentConfig> {
    let text = read_file(path)?;
    let mut value: Value = if text.starts_with(io::HEADER_PREFIX) {
        io::read_header(&text)?.0
    } else {
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    };
    if let Some(inner) = value.get_mut("config").map(Value::take) {
        value = inner;
    }
    if let Some(inner) = value.get_mut("experiment").map(Value::take) {
        value = inner;
    }
    serde_json::from_value(value).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn resolve_experiment(args: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_experiment(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &args.dist {
        cfg.dist = d.clone();
    }
    if let Some(t) = args.tmax {
        cfg.t_max = t;
    }
    if let Some(n) = args.trees {
        cfg.n_trees = n;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(h) = &args.h {
        cfg.h = h.clone();
    }
    if let Some(q) = &args.q {
        cfg.q_mode = QMode::Fixed { q: q.clone() };
    }
    if args.q_schedule {
        cfg.q_mode = QMode::Schedule;
    }
    if let Some(z) = args.z {
        cfg.z_schedule = ZSchedule::Fixed { z };
    }
    if args.c3.is_some() || args.k.is_some() {
        let (c3, k) = match cfg.z_schedule {
            ZSchedule::Power { c3, k } => (c3, k),
            ZSchedule::Fixed { .. } => (8.0, 3.0),
        };
        cfg.z_schedule = ZSchedule::Power { c3: args.c3.unwrap_or(c3), k: args.k.unwrap_or(k) };
    }
    if let Some(m) = args.margin {
        cfg.depth_margin = m;
    }
    if let Some(e) = args.estimator {
        cfg.estimator = match e {
            EstimatorArg::Exact => Estimator::Exact,
            EstimatorArg::Walks => Estimator::Walks,
            EstimatorArg::Auto => Estimator::Auto,
        };
    }
    if let Some(w) = args.walks {
        cfg.walks_per_tree = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_path(out: &Output, cfg: &ExperimentConfig) -> Option<PathBuf> {
    out.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

/// `returns.csv` becomes `returns.bounds.csv`.
fn bounds_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.bounds.csv"))
}

fn anneal_cmd(args: AnnealArgs, workers: usize) -> CliResult<()> {
    let cfg = resolve_experiment(&args.experiment)?;
    let run = annealed_run(&cfg, workers)?;
    let config = json!({ "command": "anneal", "experiment": cfg });
    let out = output_path(&args.output, &cfg);
    emit(out.as_deref(), &io::write_returns_csv(&run.series, &config))?;

    let worst = run.bound_violations.iter().copied().fold(None, |acc: Option<(u32, f64, f64)>, row| match acc {
        Some(a) if a.2 >= row.2 => Some(a),
        _ => Some(row),
    });
    eprintln!("estimator: {:?}", run.estimator);
    match worst {
        Some((t, bound, frac)) if frac > 0.0 => {
            eprintln!("largest bound violation: {frac:.4} of trees at t = {t} (bound {bound:.6e})")
        }
        _ => eprintln!("no tree exceeds the schedule bound"),
    }
    if let Some(path) = out {
        let bounds = bounds_path(&path);
        emit(Some(&bounds), &io::write_bounds_csv(&run.bound_violations, &config))?;
    }
    Ok(())
}

fn events_cmd(args: EventsArgs, workers: usize) -> CliResult<()> {
    let cfg = resolve_experiment(&args.experiment)?;
    let ts = args.ts.clone().unwrap_or_else(|| (1..=cfg.t_max).collect());
    let rows = event_frequencies(&cfg, args.event, &ts, workers)?;
    let config = json!({ "command": "events", "experiment": cfg, "event": args.event, "ts": ts });
    emit(output_path(&args.output, &cfg).as_deref(), &io::write_events_csv(&rows, &config))
}

fn fit_cmd(args: FitArgs) -> CliResult<()> {
    let (source, series) = io::read_returns_csv(&read_file(&args.input)?)?;
    let (t_lo, t_hi) = match (args.t_lo, args.t_hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => default_window(&series)
            .ok_or_else(|| Failure::Runtime("no usable fit window in the input series".into()))?,
    };
    let fit = fit_decay(&series, t_lo, t_hi)?;
    let config = json!({
        "command": "fit",
        "input": args.input.display().to_string(),
        "source": source,
        "t_lo": t_lo,
        "t_hi": t_hi,
    });
    emit(args.output.out.as_deref(), &io::write_fit_csv(&[fit], &config))
}

fn verify_cmd(args: VerifyArgs) -> CliResult<()> {
    let corpus = match args.corpus {
        CorpusArg::Small => verify::Corpus::Small,
        CorpusArg::Full => verify::Corpus::Full,
    };
    let report = verify::run(corpus, args.seed);
    let mut failed = Vec::new();
    for check in &report.checks {
        match &check.result {
            Ok(detail) => println!("PASS {}: {detail}", check.name),
            Err(detail) => {
                println!("FAIL {}: {detail}", check.name);
                failed.push(check.name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("failed checks {} (seed {})", failed.join(", "), args.seed)))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let workers = match cli.workers {
        Some(0) => return Err(Failure::Config("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    match cli.command {
        Command::SampleTree(a) => sample_tree_cmd(a),
        Command::Islands(a) => islands_cmd(a),
        Command::OceanChain(a) => ocean_cmd(a),
        Command::HeatKernel(a) => heat_kernel_cmd(a),
        Command::Anneal(a) => anneal_cmd(a, workers),
        Command::Events(a) => events_cmd(a, workers),
        Command::Fit(a) => fit_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gwhk: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
