//! `patchwork`: fit, evaluate, construct and extract patchwork fields.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchwork_core::extract::DEFAULT_MAX_NODES;
use patchwork_core::init::DEFAULT_MAX_TERMS;

mod commands;
mod exit;

#[derive(Debug, Parser)]
#[command(name = "patchwork", version, about = "Compact shapes from signed log-sum-exp fields")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Output directory for commands that write a run. Relative paths go
    /// under $PATCHWORK_RUN_DIR when it is set.
    #[arg(long, global = true)]
    pub run_dir: Option<PathBuf>,
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Use full-size resolutions and sample counts (MC 512, 1M metric samples).
    #[arg(long, global = true)]
    pub paper_scale: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a field to a mesh, an oriented point cloud or an analytic shape.
    Fit(FitArgs),
    /// Evaluate a checkpoint at given points.
    Eval(EvalArgs),
    /// Extract geometry from a checkpoint.
    Extract(ExtractArgs),
    /// Compare a candidate mesh against a reference mesh.
    Metrics(MetricsArgs),
    /// Build a field explicitly from a grid over an analytic shape.
    Construct(ConstructArgs),
    /// Construct, fit, extract and score a shape end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// OBJ/PLY mesh, PLY point cloud with normals, or a shape such as `sphere(1)`.
    pub input: String,
    /// TOML file with fit settings; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Surface samples drawn from meshes and shapes.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Dimension of point-cloud input.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub prune_interval: Option<usize>,
    /// Never disable terms.
    #[arg(long)]
    pub no_prune: bool,
    /// Start from random slopes instead of the closed-form initialization.
    #[arg(long)]
    pub kaiming: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    /// A point as comma-separated coordinates; repeatable.
    #[arg(long = "at", allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// File with one point per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtractMode {
    /// Marching squares/cubes on the smooth field.
    Mc,
    /// Exact zero set of the tropical limit.
    Tropical,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value_t = ExtractMode::Mc)]
    pub mode: ExtractMode,
    /// Grid resolution per axis for `mc` (default 128, 512 with --paper-scale).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Largest grid, in nodes, the command may allocate.
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    pub max_nodes: usize,
    /// Output file: `.obj`, or `.svg` for 2D fields.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Reference mesh.
    pub gt: PathBuf,
    /// Candidate mesh.
    pub candidate: PathBuf,
    /// Checkpoint whose parameter count goes in the row.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Points sampled on each surface (default 100k, 1M with --paper-scale).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value = "candidate")]
    pub label: String,
    #[arg(long, value_enum, default_value_t = RowFormat::Text)]
    pub format: RowFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    Grid2,
    Hex2,
    Grid3,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: ConstructKind,
    /// Grid resolution.
    #[arg(long, short)]
    pub n: usize,
    /// Shape to digitize, e.g. `circle(0.7)` or `sphere(0.8)`.
    #[arg(long)]
    pub shape: String,
    /// Checkpoint to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the tropical zero set next to the checkpoint (SVG in 2D, OBJ in 3D).
    #[arg(long)]
    pub render: bool,
    /// Largest number of terms a 3D grid may create.
    #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
    pub max_terms: usize,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value = "sphere(1)")]
    pub shape: String,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Grid size of the constructed comparison model.
    #[arg(long, default_value_t = 10)]
    pub construct_n: usize,
    /// Marching-cubes resolution (default 128, 512 with --paper-scale).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Metric samples per surface (default 100k, 1M with --paper-scale).
    #[arg(long)]
    pub metric_samples: Option<usize>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    init_logging(cli.global.verbose);
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let g = &cli.global;
    let result = match &cli.command {
        Command::Fit(a) => commands::fit(g, a),
        Command::Eval(a) => commands::eval(g, a),
        Command::Extract(a) => commands::extract(g, a),
        Command::Metrics(a) => commands::metrics(g, a),
        Command::Construct(a) => commands::construct(g, a),
        Command::Demo(a) => commands::demo(g, a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::classify(&e))
        }
    }
}
