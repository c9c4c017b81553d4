//! `clbic`: choose the number of communities in a network.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use clbic::bench::{format_bench_report, run_bench};
use clbic::io::{
    format_edge_list, format_selection_report, read_bench_file, read_edge_list, read_weight_matrix,
    weights_to_adjacency, write_text, NamedGraph, QuantileConvention, SelectionReport,
};
use clbic::netgen::generate;
use clbic::selection::{DEFAULT_K_RANGE, DEFAULT_SEED};
use clbic::{select_k, Error, Model, SelectionConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "clbic", version, about = "Community-number selection by composite-likelihood BIC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every candidate k on one network and report the minimizers.
    Select(SelectArgs),
    /// Run simulation settings and tabulate how often each criterion is right.
    Bench(BenchArgs),
    /// Write one simulated replicate as an edge list.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Sbm,
    Dcbm,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Sbm => Model::Sbm,
            ModelArg::Dcbm => Model::Dcbm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Lower,
    Linear,
    Higher,
}

impl From<ConventionArg> for QuantileConvention {
    fn from(c: ConventionArg) -> QuantileConvention {
        match c {
            ConventionArg::Lower => QuantileConvention::Lower,
            ConventionArg::Linear => QuantileConvention::Linear,
            ConventionArg::Higher => QuantileConvention::Higher,
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Edge list, or a weight matrix with --weights.
    input: PathBuf,
    /// Read the input as a square weight matrix and threshold it.
    #[arg(long)]
    weights: bool,
    /// Keep pairs whose weight reaches this quantile (with --weights).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Lower)]
    quantile_convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Sbm)]
    model: ModelArg,
    #[arg(long, default_value_t = DEFAULT_K_RANGE.0)]
    k_min: usize,
    #[arg(long, default_value_t = DEFAULT_K_RANGE.1)]
    k_max: usize,
    /// Restrict to the largest connected component first.
    #[arg(long)]
    largest_component: bool,
    #[arg(long, env = "CLBIC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file of `[[setting]]` tables.
    spec: PathBuf,
    /// Override every setting's replicate count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override every setting's seed.
    #[arg(long, env = "CLBIC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    spec: PathBuf,
    /// Setting id; the first setting when absent.
    #[arg(long)]
    setting: Option<String>,
    #[arg(long, default_value_t = 0)]
    rep: u64,
    #[arg(long, env = "CLBIC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(args: &SelectArgs) -> Result<(NamedGraph, Vec<(String, String)>), Failure> {
    let mut meta = vec![("input".to_string(), args.input.display().to_string())];
    let graph = if args.weights {
        if !(args.alpha > 0.0 && args.alpha < 1.0) {
            return Err(Failure::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
        }
        let w = read_weight_matrix(&args.input)?;
        let conv = QuantileConvention::from(args.quantile_convention);
        meta.push(("alpha".to_string(), args.alpha.to_string()));
        meta.push(("quantile_convention".to_string(), conv.to_string()));
        NamedGraph {
            adjacency: weights_to_adjacency(&w, args.alpha, conv)?,
            names: w.names,
        }
    } else {
        read_edge_list(&args.input)?
    };
    if !args.largest_component {
        return Ok((graph, meta));
    }
    let (lcc, dropped) = graph.into_largest_component();
    meta.push(("dropped_nodes".to_string(), dropped.len().to_string()));
    Ok((lcc, meta))
}

fn select(args: SelectArgs) -> Result<(), Failure> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(Failure::Usage(format!(
            "candidate range {}..={} is empty or starts at 0",
            args.k_min, args.k_max
        )));
    }
    let (graph, mut meta) = load_graph(&args)?;
    let n = graph.adjacency.n();
    let k_max = args.k_max.min(n);
    if k_max < args.k_max {
        eprintln!("clbic: k-max lowered from {} to the node count {n}", args.k_max);
    }
    if args.k_min > k_max {
        return Err(Failure::Lib(Error::InvalidArgument(format!(
            "k-min {} exceeds the node count {n}",
            args.k_min
        ))));
    }
    meta.push(("k_min".to_string(), args.k_min.to_string()));
    meta.push(("k_max".to_string(), k_max.to_string()));
    meta.push(("version".to_string(), env!("CARGO_PKG_VERSION").to_string()));
    let cfg = SelectionConfig::new(args.model.into(), args.k_min, k_max, args.seed);
    let result = select_k(&graph.adjacency, &cfg)?;
    eprintln!(
        "clbic: n={n} chosen_clbic={} chosen_bic={}",
        result.chosen_clbic, result.chosen_bic
    );
    let report = SelectionReport {
        result,
        names: graph.names,
        meta,
    };
    emit(args.out.as_deref(), &format_selection_report(&report)?)
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut file = read_bench_file(&args.spec)?;
    for s in &mut file.setting {
        if let Some(r) = args.reps {
            s.spec.reps = r;
        }
        if let Some(seed) = args.seed {
            s.spec.seed = seed;
        }
    }
    let mut report = run_bench(&file)?;
    report
        .meta
        .insert(0, ("spec".to_string(), args.spec.display().to_string()));
    emit(args.out.as_deref(), &format_bench_report(&report)?)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let file = read_bench_file(&args.spec)?;
    let setting = match &args.setting {
        Some(id) => file
            .setting
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| Failure::Usage(format!("no setting {id:?} in {}", args.spec.display())))?,
        None => file
            .setting
            .first()
            .ok_or_else(|| Failure::Usage("spec file has no settings".into()))?,
    };
    let mut spec = setting.spec.clone();
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let sim = generate(&spec, args.rep)?;
    let names = (0..sim.adjacency.n()).map(|i| format!("v{i}")).collect();
    let graph = NamedGraph {
        adjacency: sim.adjacency,
        names,
    };
    let mut text = format!(
        "# setting {} rep {} seed {}\n# communities {:?}\n",
        setting.id,
        args.rep,
        spec.seed,
        sim.labels.labels().iter().map(|c| c + 1).collect::<Vec<_>>()
    );
    text.push_str(&format_edge_list(&graph));
    emit(args.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Select(a) => select(a),
        Command::Bench(a) => bench(a),
        Command::Simulate(a) => simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("clbic: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("clbic: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}
