use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use combgap::bnb::{branch_and_bound, BnBConfig, BoundKind};
use combgap::combs::{comb_lp, separate_combs, COMB_TOL};
use combgap::experiments::{estimate_constants, gap_experiment, tree_growth_experiment, RunConfig};
use combgap::gadget::{build_gadget_solution, local_lengths, verify_gadget_lemmas, EntryMode};
use combgap::instance::io::{read_points, to_text, write_points};
use combgap::instance::{build_gadget, generate_uniform, PointSet};
use combgap::lp::{held_karp, EdgeFixings, CUT_TOL};
use combgap::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "combgap",
    version,
    about = "Held-Karp and comb bounds, gadgets and branch-and-bound for the Euclidean TSP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample uniform points in the unit cube.
    Gen(InstanceArgs),
    /// Build the two-ring gadget with its half-integral solution.
    Gadget(GadgetArgs),
    /// Held-Karp bound of one instance.
    Hk(InstanceArgs),
    /// Comb-augmented bound of one instance and the most violated comb of its HK solution.
    Combs(InstanceArgs),
    /// Exact tour by branch-and-bound.
    Bnb(BnbArgs),
    /// Scaled tour and bound constants on uniform instances.
    Constants(ExperimentArgs),
    /// Planted gadget gap experiment.
    Gap(ExperimentArgs),
    /// Branch-and-bound tree growth census.
    Growth(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct InstanceArgs {
    /// Point count of a generated instance.
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Comb size limit.
    #[arg(long, default_value_t = 6)]
    c: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Read points from this file instead of generating them.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long, default_value_t = 6)]
    c: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Entry/exit pairs of the local solution (1 or 2).
    #[arg(long, default_value_t = 1)]
    entries: usize,
    /// Also search for violated combs up to size c.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 200_000)]
    node_limit: usize,
    /// Write the gadget points here and its metadata next to them; the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    Hk,
    Comb,
}

#[derive(Args)]
struct BnbArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Bound::Hk)]
    bound: Bound,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
    /// Write one JSON line per search node here.
    #[arg(long)]
    node_log: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Sizes as a list `8,10,12` or an inclusive range `8-14`.
    #[arg(long, value_parser = parse_grid)]
    n: Option<Grid>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    /// Gadget ring size.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    exact_limit: Option<usize>,
    /// Directory receiving JSON and CSV reports.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Gadget copies per gap instance.
    #[arg(long)]
    planted: Option<usize>,
    /// Anchor points per planted copy.
    #[arg(long)]
    n_extra: Option<usize>,
    /// Also grow trees under the comb bound.
    #[arg(long)]
    comb_trees: bool,
}

#[derive(Clone)]
struct Grid(Vec<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let bad = |_| format!("`{s}` is not a size list or range");
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (
            a.trim().parse().map_err(bad)?,
            b.trim().parse().map_err(bad)?,
        );
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        return Ok(Grid((a..=b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(bad))
        .collect::<Result<_, _>>()
        .map(Grid)
}

impl ExperimentArgs {
    fn config(&self, base: RunConfig) -> RunConfig {
        RunConfig {
            n_grid: self.n.clone().map_or(base.n_grid, |g| g.0),
            d: self.d.unwrap_or(base.d),
            c: self.c.unwrap_or(base.c),
            k: self.k.unwrap_or(base.k),
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            exact_limit: self.exact_limit.unwrap_or(base.exact_limit),
            planted: self.planted.unwrap_or(base.planted),
            n_extra: self.n_extra.unwrap_or(base.n_extra),
            comb_trees: self.comb_trees || base.comb_trees,
            out_dir: self.out.clone(),
            ..base
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(out: Option<&Path>, text: &str) -> combgap::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn instance(args: &InstanceArgs) -> combgap::Result<PointSet> {
    match &args.input {
        Some(path) => read_points(path),
        None => generate_uniform(args.n, args.d, args.seed),
    }
}

fn pretty(value: &serde_json::Value) -> combgap::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: Cli) -> combgap::Result<()> {
    match cli.command {
        Command::Gen(args) => {
            let points = generate_uniform(args.n, args.d, args.seed)?;
            match &args.out {
                Some(path) => write_points(path, &points),
                None => emit(None, &to_text(&points)),
            }
        }
        Command::Gadget(args) => {
            let (points, meta) = build_gadget(args.k, args.scale)?;
            let sol =
                build_gadget_solution(&meta, args.c, EntryMode::from_entries(args.entries)?, None)?;
            let gap = local_lengths(&points, &meta, &sol, args.node_limit)?;
            let lemmas = if args.verify {
                Some(verify_gadget_lemmas(&meta, &sol, args.c, args.c)?)
            } else {
                None
            };
            if let Some(path) = &args.out {
                write_points(path, &points)?;
                let meta_path = path.with_extension("meta.json");
                std::fs::write(&meta_path, pretty(&json!(meta))?)
                    .map_err(|e| io_error(&meta_path, e))?;
            }
            emit(
                None,
                &pretty(&json!({ "meta": meta, "solution": sol, "gap": gap, "lemmas": lemmas }))?,
            )
        }
        Command::Hk(args) => {
            let points = instance(&args)?;
            let r = held_karp(&points, &EdgeFixings::new(), CUT_TOL)?;
            let text = match args.format {
                Format::Json => pretty(&json!({
                    "n": points.len(),
                    "value": r.value,
                    "status": r.status,
                    "cuts_added": r.cuts_added,
                    "iterations": r.iterations,
                    "support": r.solution.support(1e-9),
                }))?,
                Format::Csv => format!(
                    "n,value,cuts_added,iterations\n{},{},{},{}\n",
                    points.len(),
                    r.value,
                    r.cuts_added,
                    r.iterations
                ),
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Combs(args) => {
            let points = instance(&args)?;
            let hk = held_karp(&points, &EdgeFixings::new(), CUT_TOL)?;
            let comb = comb_lp(&points, args.c, &EdgeFixings::new(), CUT_TOL)?;
            let hit = separate_combs(&hk.solution, args.c, COMB_TOL)?;
            let text = match args.format {
                Format::Json => pretty(&json!({
                    "n": points.len(),
                    "c": args.c,
                    "held_karp": hk.value,
                    "comb": comb.value,
                    "comb_cuts_added": comb.cuts_added,
                    "violated_by_held_karp": hit.as_ref().map(|h| json!({ "comb": h.comb, "lhs": h.lhs, "slack": h.slack })),
                }))?,
                Format::Csv => format!(
                    "n,c,held_karp,comb,violated\n{},{},{},{},{}\n",
                    points.len(),
                    args.c,
                    hk.value,
                    comb.value,
                    hit.is_some()
                ),
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Bnb(args) => {
            let points = instance(&args.instance)?;
            let mut config = BnBConfig::new(match args.bound {
                Bound::Hk => BoundKind::HeldKarp,
                Bound::Comb => BoundKind::Comb { c: args.instance.c },
            });
            config.seed = args.instance.seed;
            config.node_limit = Some(args.node_limit);
            config.record_nodes = args.node_log.is_some();
            let result = branch_and_bound(&points, &config)?;
            if let Some(path) = &args.node_log {
                let file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
                let mut w = std::io::BufWriter::new(file);
                result.write_json_lines(&mut w)?;
                w.flush().map_err(|e| io_error(path, e))?;
            }
            let s = &result.stats;
            let length = result.tour.as_ref().map(|t| t.length);
            let text = match args.instance.format {
                Format::Json => pretty(&json!({
                    "n": points.len(),
                    "optimal": result.optimal,
                    "tour": result.tour,
                    "stats": s,
                    "wall_time_ms": s.wall_time_ms,
                }))?,
                Format::Csv => format!(
                    "n,length,optimal,nodes_expanded,leaves,max_depth\n{},{},{},{},{},{}\n",
                    points.len(),
                    length.map_or(String::new(), |l| l.to_string()),
                    result.optimal,
                    s.nodes_expanded,
                    s.leaves,
                    s.max_depth
                ),
            };
            emit(args.instance.out.as_deref(), &text)
        }
        Command::Constants(args) => {
            let report = estimate_constants(&args.config(RunConfig::default()))?;
            emit(
                None,
                &render(args.format, report.to_json()?, report.to_csv()?),
            )
        }
        Command::Gap(args) => {
            let report = gap_experiment(&args.config(RunConfig {
                n_grid: vec![3],
                ..RunConfig::default()
            }))?;
            emit(
                None,
                &render(args.format, report.to_json()?, report.to_csv()?),
            )
        }
        Command::Growth(args) => {
            let base = RunConfig {
                n_grid: vec![10, 12, 14, 16],
                trials: 10,
                ..RunConfig::default()
            };
            let report = tree_growth_experiment(&args.config(base))?;
            emit(
                None,
                &render(args.format, report.to_json()?, report.to_csv()?),
            )
        }
    }
}

fn render(format: Format, json: String, csv: String) -> String {
    match format {
        Format::Json => json + "\n",
        Format::Csv => csv,
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_)
        | Error::SizeLimit { .. }
        | Error::UnderfilledBox { .. }
        | Error::NotDecomposable(_) => 2,
        Error::Invariant(_) | Error::Lp(_) => 3,
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("combgap: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
