//! The `stratkit` command line: thin adapters from files and flags to the
//! library. Every subcommand is a pure function of its inputs and `--seed`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::detect::{
    self, agglomerative, cluster::Linkage, generate::generate, kmeans, labels_from_csv, labels_to_csv, two_nn_dim, vgt,
    vgt::DEFAULT_MIN_MEDIAN_COUNT, vgt_dot_features_trimmed, DetectError, IndexedTable, PointCloud, RadiusGrid,
};
use crate::plot::{self, PlotError, Series};
use crate::poset::{PosetData, PosetError};
use crate::predicates::{PredicateError, StratifiedFamily};
use crate::rl::{self, EnvSpec, GridEnv, QParams, RlError};
use crate::spaces::{
    overlap_poset, overlap_poset_bruteforce, traj_stratify, tree_stratification, CoinConfig, FacePolicy, SpacesError,
    TargetSet,
};
use crate::stl::{self, FunctionRegistry, StlError};
use crate::trace::{Trace, TraceError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Spaces(#[from] SpacesError),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stratkit", version, propagate_version = true, about = "Stratified spaces, STL robustness and stratification detection")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-point computations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic point cloud.
    Gen(GenArgs),
    /// Volume growth curves of selected points.
    Vgt(VgtArgs),
    /// VGT-dot features of every point.
    Vgtdot(VgtDotArgs),
    /// Local or global intrinsic dimension.
    Dim(DimArgs),
    /// Cluster feature rows.
    Cluster(ClusterArgs),
    /// Geodesic embedding.
    Isomap(IsomapArgs),
    /// Temporal-logic tools.
    #[command(subcommand)]
    Stl(StlCommand),
    /// Tree stratification of a grid policy.
    GridStratify(GridArgs),
    /// Space-time coin game.
    #[command(subcommand)]
    Coin(CoinCommand),
    /// Stratify traces by when they visit a target set.
    TrajStratify(TrajArgs),
    /// Gridworld learning with temporal-logic rewards.
    #[command(subcommand)]
    Rl(RlCommand),
    /// SVG plots.
    #[command(subcommand)]
    Plot(PlotCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Generator {
    RoomCorridor,
    Hourglass,
    Segment,
    SegmentTube,
    Circle,
    Square,
    HalfCylinder,
    Line3d,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    /// Gaussian jitter (room-corridor only).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VgtArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Point indices (default: the first three rows).
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,
    #[arg(long, default_value_t = detect::vgt::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VgtDotArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Smoothing bandwidth in log-radius units (default: 3 grid steps).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Drop radii whose median ball count is below this; 0 keeps all.
    #[arg(long, default_value_t = DEFAULT_MIN_MEDIAN_COUNT)]
    pub min_count: f64,
    #[arg(long, default_value_t = detect::vgt::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DimMethod {
    Ls,
    Twonn,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = DimMethod::Ls)]
    pub method: DimMethod,
    /// Fit window as two radii `lo,hi` (default: a fixed share of the grid).
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<f64>>,
    /// Per-point estimates (ls only).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClusterMethod {
    Kmeans,
    Average,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ClusterMethod::Kmeans)]
    pub method: ClusterMethod,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct IsomapArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub d_out: usize,
    #[arg(long, default_value_t = detect::embed::DEFAULT_LANDMARKS)]
    pub landmarks: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum StlCommand {
    /// Robustness of a formula on a trace.
    Eval(StlEvalArgs),
}

#[derive(Debug, Args)]
pub struct StlEvalArgs {
    #[arg(long, conflicts_with = "formula_file")]
    pub formula: Option<String>,
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub at: usize,
    /// Print `clamp(rho / SCALE, -1, 1)` instead.
    #[arg(long)]
    pub normalize: Option<f64>,
    /// Stratified family whose `d_<id>` atoms the formula may use.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    #[arg(long, default_value_t = 3)]
    pub cols: usize,
    /// Goal tile `row,col` (0-based); ignored with --policy.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 0])]
    pub goal: Vec<usize>,
    /// Face policy JSON; a seeded uniform spanning tree when absent.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CoinCommand {
    /// Overlap poset of a coin configuration.
    Overlap(CoinArgs),
}

#[derive(Debug, Args)]
pub struct CoinArgs {
    /// Coin configuration JSON (default: the built-in five-coin layout).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Use the grid oracle at this resolution.
    #[arg(long)]
    pub bruteforce: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    /// Target set JSON.
    #[arg(long)]
    pub target: PathBuf,
    /// Trace CSV files.
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum RlCommand {
    /// Train a policy and evaluate it from every start state.
    Train(RlTrainArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RlMethod {
    Q,
    Vi,
}

#[derive(Debug, Args)]
pub struct RlTrainArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    /// Default: as many as fit in 200k steps.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, value_enum, default_value_t = RlMethod::Q)]
    pub method: RlMethod,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum PlotCommand {
    /// Rows of an indexed table (e.g. `vgt` output) against log radius.
    Lines(PlotLinesArgs),
    /// First two columns of a cloud or embedding, colored by labels.
    Scatter(PlotScatterArgs),
    /// `episode,reward` learning curve.
    Curve(PlotCurveArgs),
}

#[derive(Debug, Args)]
pub struct PlotLinesArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Row positions to draw (default: all).
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotScatterArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotCurveArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn join(vals: &[f64]) -> String {
    vals.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn read_cloud(path: &Path) -> Result<PointCloud, CliError> {
    Ok(PointCloud::from_csv_str(&read_text(path)?)?.0)
}

struct Ctx {
    quiet: bool,
    seed: u64,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn wrote(&self, path: &Path) {
        self.note(format!("wrote {}", path.display()));
    }
}

/// Runs a parsed command line; results go to files and stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let ctx = Ctx { quiet: cli.quiet, seed: cli.seed };
    match cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a),
        Command::Vgt(a) => cmd_vgt(&ctx, a),
        Command::Vgtdot(a) => cmd_vgtdot(&ctx, a),
        Command::Dim(a) => cmd_dim(&ctx, a),
        Command::Cluster(a) => cmd_cluster(&ctx, a),
        Command::Isomap(a) => cmd_isomap(&ctx, a),
        Command::Stl(StlCommand::Eval(a)) => cmd_stl_eval(a),
        Command::GridStratify(a) => cmd_grid_stratify(&ctx, a),
        Command::Coin(CoinCommand::Overlap(a)) => cmd_coin(&ctx, a),
        Command::TrajStratify(a) => cmd_traj_stratify(&ctx, a),
        Command::Rl(RlCommand::Train(a)) => cmd_rl_train(&ctx, a),
        Command::Plot(p) => cmd_plot(&ctx, p),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_gen(ctx: &Ctx, a: GenArgs) -> Result<(), CliError> {
    let name = a.generator.to_possible_value().expect("named variant").get_name().to_string();
    let lc = match (a.generator, a.noise) {
        (Generator::RoomCorridor, Some(noise)) => detect::gen_room_corridor(a.n, noise, ctx.seed)?,
        (_, Some(_)) => return Err(CliError::Usage("--noise applies to room-corridor only".into())),
        (_, None) => generate(&name, a.n, ctx.seed)?,
    };
    write_text(&a.output, &lc.cloud.to_csv_string(Some(&lc.labels)))?;
    ctx.wrote(&a.output);
    Ok(())
}

fn grid_for(pc: &PointCloud, m: usize) -> RadiusGrid {
    RadiusGrid::for_cloud_with(pc, m)
}

fn cmd_vgt(ctx: &Ctx, a: VgtArgs) -> Result<(), CliError> {
    let pc = read_cloud(&a.input)?;
    let grid = grid_for(&pc, a.grid_points);
    let points = a.points.unwrap_or_else(|| (0..pc.len().min(3)).collect());
    let rows = points.iter().map(|&i| Ok(vgt(&pc, i, &grid)?.log_counts)).collect::<Result<Vec<_>, CliError>>()?;
    let log_radii: Vec<f64> = grid.radii().iter().map(|r| r.ln()).collect();
    let table = IndexedTable::new(points, PointCloud::from_rows(&rows)?).with_comment("log_radii", join(&log_radii));
    write_text(&a.output, &table.to_csv_string("v"))?;
    ctx.wrote(&a.output);
    Ok(())
}

fn cmd_vgtdot(ctx: &Ctx, a: VgtDotArgs) -> Result<(), CliError> {
    let pc = read_cloud(&a.input)?;
    let grid = grid_for(&pc, a.grid_points);
    let bw = a.bandwidth.unwrap_or_else(|| grid.default_bandwidth());
    let (features, start) = vgt_dot_features_trimmed(&pc, &grid, bw, a.min_count)?;
    let log_radii: Vec<f64> = grid.radii()[start..].iter().map(|r| r.ln()).collect();
    let table = IndexedTable::sequential(features)
        .with_comment("log_radii", join(&log_radii))
        .with_comment("bandwidth", bw.to_string());
    write_text(&a.output, &table.to_csv_string("d"))?;
    ctx.wrote(&a.output);
    Ok(())
}

fn cmd_dim(ctx: &Ctx, a: DimArgs) -> Result<(), CliError> {
    let pc = read_cloud(&a.input)?;
    match a.method {
        DimMethod::Twonn => {
            if a.output.is_some() {
                return Err(CliError::Usage("twonn gives one global estimate; drop --output".into()));
            }
            println!("{}", two_nn_dim(&pc)?.estimate);
        }
        DimMethod::Ls => {
            let grid = RadiusGrid::for_cloud(&pc);
            let window = match a.window.as_deref() {
                Some([lo, hi]) => (*lo, *hi),
                Some(w) => return Err(CliError::Usage(format!("--window takes lo,hi; got {} values", w.len()))),
                None => grid.default_window(),
            };
            let dims = detect::local_dims(&pc, &grid, window)?;
            let mut sorted = dims.clone();
            sorted.sort_by(f64::total_cmp);
            println!("{}", sorted[(sorted.len() - 1) / 2]);
            if let Some(out) = &a.output {
                let rows: Vec<Vec<f64>> = dims.iter().map(|d| vec![*d]).collect();
                let table = IndexedTable::sequential(PointCloud::from_rows(&rows)?)
                    .with_comment("window", format!("{};{}", window.0, window.1));
                write_text(out, &table.to_csv_string("dim"))?;
                ctx.wrote(out);
            }
        }
    }
    Ok(())
}

fn cmd_cluster(ctx: &Ctx, a: ClusterArgs) -> Result<(), CliError> {
    let f = read_cloud(&a.input)?;
    let labels = match a.method {
        ClusterMethod::Kmeans => kmeans(&f, a.k, ctx.seed)?.labels,
        ClusterMethod::Average => agglomerative(&f, a.k, Linkage::Average)?,
    };
    write_text(&a.output, &labels_to_csv(&labels))?;
    ctx.wrote(&a.output);
    Ok(())
}

fn cmd_isomap(ctx: &Ctx, a: IsomapArgs) -> Result<(), CliError> {
    let pc = read_cloud(&a.input)?;
    let params = detect::embed::IsomapParams { k_neighbors: a.k, d_out: a.d_out, landmarks: a.landmarks };
    let emb = detect::embed::isomap_with(&pc, params)?;
    write_text(&a.output, &emb.to_csv_string())?;
    ctx.note(format!("residual variance {}", emb.residual));
    ctx.wrote(&a.output);
    Ok(())
}

fn cmd_stl_eval(a: StlEvalArgs) -> Result<(), CliError> {
    let text = match (&a.formula, &a.formula_file) {
        (Some(f), None) => f.clone(),
        (None, Some(p)) => read_text(p)?,
        _ => return Err(CliError::Usage("give exactly one of --formula and --formula-file".into())),
    };
    let phi = stl::parse(text.trim())?;
    let trace = Trace::from_csv_str(&read_text(&a.trace)?)?;
    let reg = match &a.family {
        Some(p) => StratifiedFamily::from_json(&read_text(p)?)?.registry(),
        None => FunctionRegistry::new(),
    };
    let rho = stl::robustness(&phi, &trace, a.at, &reg)?;
    match a.normalize {
        Some(scale) => println!("{}", stl::normalize(rho, scale)?),
        None => println!("{rho}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct GridReport {
    policy: FacePolicy,
    tree: PosetData,
    assignment: BTreeMap<String, String>,
    monotone: bool,
}

fn cmd_grid_stratify(ctx: &Ctx, a: GridArgs) -> Result<(), CliError> {
    let policy = match &a.policy {
        Some(p) => serde_json::from_str::<FacePolicy>(&read_text(p)?)?,
        None => {
            let [r, c] = a.goal[..] else {
                return Err(CliError::Usage(format!("--goal takes row,col; got {} values", a.goal.len())));
            };
            let goal = (r, c);
            if a.rows == 0 || a.cols == 0 || goal.0 >= a.rows || goal.1 >= a.cols {
                return Err(CliError::Usage(format!("goal {goal:?} outside a {}x{} grid", a.rows, a.cols)));
            }
            FacePolicy::random_spanning_tree(a.rows, a.cols, goal, &mut ChaCha8Rng::seed_from_u64(ctx.seed))
        }
    };
    let policy = FacePolicy::new(policy.rows, policy.cols, policy.goal, policy.moves)?;
    let s = tree_stratification(&policy)?;
    let assignment = s
        .map
        .source
        .elements()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), s.map.target.name(s.map.image_idx(i)).to_string()))
        .collect();
    let report = GridReport { tree: s.tree.tree.to_data(), assignment, monotone: s.map.is_monotone().monotone, policy };
    write_text(&a.output, &to_json(&report)?)?;
    ctx.wrote(&a.output);
    if let Some(dot) = &a.dot {
        write_text(dot, &s.tree.tree.to_dot("policy_tree"))?;
        ctx.wrote(dot);
    }
    Ok(())
}

fn cmd_coin(ctx: &Ctx, a: CoinArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => CoinConfig::from_json(&read_text(p)?)?,
        None => CoinConfig::default5(),
    };
    let o = match a.bruteforce {
        Some(res) => overlap_poset_bruteforce(&cfg, res)?,
        None => overlap_poset(&cfg)?,
    };
    write_text(&a.output, &(o.poset.to_json() + "\n"))?;
    ctx.wrote(&a.output);
    if let Some(dot) = &a.dot {
        write_text(dot, &o.poset.to_dot("overlap"))?;
        ctx.wrote(dot);
    }
    println!("{}", o.len());
    Ok(())
}

#[derive(Serialize)]
struct TrajReport {
    labels: Vec<Vec<f64>>,
    poset: PosetData,
    element_of: Vec<usize>,
}

fn cmd_traj_stratify(ctx: &Ctx, a: TrajArgs) -> Result<(), CliError> {
    let target: TargetSet = serde_json::from_str(&read_text(&a.target)?)?;
    let traces = a.traces.iter().map(|p| Ok(Trace::from_csv_str(&read_text(p)?)?)).collect::<Result<Vec<_>, CliError>>()?;
    let s = traj_stratify(&traces, &target)?;
    let report = TrajReport { labels: s.labels, poset: s.poset.to_data(), element_of: s.element_of };
    write_text(&a.output, &to_json(&report)?)?;
    ctx.wrote(&a.output);
    println!("{}", s.poset.len());
    Ok(())
}

/// Episodes that fit in the default step budget.
pub const RL_STEP_BUDGET: usize = 200_000;

fn cmd_rl_train(ctx: &Ctx, a: RlTrainArgs) -> Result<(), CliError> {
    let mut spec = EnvSpec::from_json(&read_text(&a.env)?)?;
    if let Some(p) = &a.formula_file {
        spec.formula = Some(read_text(p)?.trim().to_string());
    }
    let env = GridEnv::build(spec)?;
    let (policy, curve) = match a.method {
        RlMethod::Vi => (rl::value_iteration(&env)?.policy, None),
        RlMethod::Q => {
            let episodes = a.episodes.unwrap_or((RL_STEP_BUDGET / env.horizon()).max(1));
            let learned = rl::q_learning(&env, &QParams { episodes, ..QParams::default() }, ctx.seed)?;
            (learned.policy, Some(learned.curve))
        }
    };
    write_text(&a.out.join("policy.json"), &(policy.to_json(&env) + "\n"))?;
    if let Some(curve) = curve {
        let mut text = String::from("episode,reward\n");
        for (e, r) in curve.iter().enumerate() {
            let _ = writeln!(text, "{e},{r}");
        }
        write_text(&a.out.join("curve.csv"), &text)?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["start", "reward", "robustness"]).map_err(DetectError::from)?;
    let mut positive = 0;
    let starts = env.start_states();
    for &s in &starts {
        let ep = rl::rollout(&env, &policy, s)?;
        positive += usize::from(ep.reward > 0.0);
        w.write_record([env.state(s).to_string(), ep.reward.to_string(), ep.robustness.to_string()]).map_err(DetectError::from)?;
    }
    let eval = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8");
    write_text(&a.out.join("eval.csv"), &eval)?;
    ctx.wrote(&a.out);
    println!("{positive}/{}", starts.len());
    Ok(())
}

fn cmd_plot(ctx: &Ctx, p: PlotCommand) -> Result<(), CliError> {
    let (svg, out) = match p {
        PlotCommand::Lines(a) => {
            let t = IndexedTable::from_csv_str(&read_text(&a.input)?)?;
            let xs: Vec<f64> = match t.comment("log_radii") {
                Some(s) => s
                    .split(';')
                    .map(|v| v.parse::<f64>().map_err(|e| DetectError::Parse(format!("log_radii: {e}"))))
                    .collect::<Result<_, _>>()?,
                None => (0..t.values.dim()).map(|k| k as f64).collect(),
            };
            let rows = a.rows.unwrap_or_else(|| (0..t.index.len()).collect());
            let series = rows
                .iter()
                .map(|&r| {
                    t.values.check_index(r)?;
                    Ok(Series::new(format!("point {}", t.index[r]), xs.clone(), t.values.point(r).to_vec()))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (plot::line_plot(&series, &a.title, "ln r", "value")?, a.output)
        }
        PlotCommand::Scatter(a) => {
            let pc = read_cloud(&a.input)?;
            if pc.dim() < 2 {
                return Err(CliError::Usage("scatter needs at least two columns".into()));
            }
            let labels = match &a.labels {
                Some(p) => labels_from_csv(&read_text(p)?)?,
                None => vec![0; pc.len()],
            };
            let xs: Vec<f64> = pc.points().map(|p| p[0]).collect();
            let ys: Vec<f64> = pc.points().map(|p| p[1]).collect();
            (plot::scatter_plot(&xs, &ys, &labels, &a.title)?, a.output)
        }
        PlotCommand::Curve(a) => {
            let text = read_text(&a.input)?;
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for rec in rdr.records() {
                let rec = rec.map_err(DetectError::from)?;
                let num = |i: usize| {
                    rec.get(i).unwrap_or("").parse::<f64>().map_err(|e| DetectError::Parse(format!("{e}")))
                };
                xs.push(num(0)?);
                ys.push(num(1)?);
            }
            (plot::line_plot(&[Series::new("reward", xs, ys)], &a.title, "episode", "reward")?, a.output)
        }
    };
    write_text(&out, &svg)?;
    ctx.wrote(&out);
    Ok(())
}
