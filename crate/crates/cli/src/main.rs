use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastic_geodesics_cli::commands;
use elastic_geodesics_cli::config::ModeName;
use elastic_geodesics_cli::files::write_file;
use elastic_geodesics_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "elastic-geodesics", version, about = "Elastic Sobolev geodesics and distances between planar curves")]
struct Cli {
    /// JSON run configuration; omitted sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Penalty,
    Auglag,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Penalty weight λ_w (penalty mode).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    opt_rot: bool,
    #[arg(long)]
    opt_tra: bool,
    #[arg(long)]
    opt_scale: bool,
}

impl SolverFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.mode {
            cfg.options.mode = match m {
                Mode::Penalty => ModeName::Penalty,
                Mode::Auglag => ModeName::Auglag,
            };
        }
        if let Some(l) = self.lambda {
            cfg.options.penalty_weight = l;
        }
        cfg.options.opt_rotation |= self.opt_rot;
        cfg.options.opt_translation |= self.opt_tra;
        cfg.options.opt_scale |= self.opt_scale;
    }
}

#[derive(Subcommand)]
enum Command {
    /// Geodesic between two curves: manifest, path control points, SVG strip.
    Geodesic {
        source: Option<PathBuf>,
        target: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise shape distances of the curves listed in a JSON file.
    DistanceMatrix {
        list: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV output; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy of a stored path and its per-term breakdown.
    Energy { path: PathBuf },
    /// SVG strip of snapshots of a stored path.
    Render {
        path: PathBuf,
        /// Curve drawn dashed in every frame.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = commands::DEFAULT_FRAMES)]
        frames: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squared varifold distance between two curves.
    VarifoldDist { first: PathBuf, second: PathBuf },
}

fn required(arg: Option<PathBuf>, fallback: &Option<String>, what: &str) -> Result<PathBuf, CliError> {
    arg.or_else(|| fallback.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Input(format!("missing {what} (argument or io.{what} in the config)")))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Geodesic { source, target, solver, out } => {
            solver.apply(&mut cfg);
            let source = required(source, &cfg.io.source, "source")?;
            let target = required(target, &cfg.io.target, "target")?;
            let out = required(out, &cfg.io.out, "out")?;
            let manifest = commands::geodesic(&source, &target, &cfg, &out)?;
            println!(
                "energy {:.6e}  d2 {:.3e}  distance {:.6e}  ({})",
                manifest.energy, manifest.dist_sq, manifest.distance, manifest.termination
            );
            if !manifest.converged {
                return Err(CliError::Solver(format!("{} (see {})", manifest.termination, out.join(commands::MANIFEST_FILE).display())));
            }
            Ok(())
        }
        Command::DistanceMatrix { list, solver, jobs, out } => {
            solver.apply(&mut cfg);
            let m = commands::distance_matrix(&list, &cfg, jobs)?;
            let out = out.or_else(|| cfg.io.out.as_ref().map(PathBuf::from));
            emit(&m.to_csv(), out.as_deref())
        }
        Command::Energy { path } => {
            let r = commands::energy(&path, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            Ok(())
        }
        Command::Render { path, target, frames, out } => {
            let svg = commands::render(&path, target.as_deref(), frames, &cfg)?;
            emit(&svg, out.as_deref())
        }
        Command::VarifoldDist { first, second } => {
            let r = commands::varifold_dist(&first, &second, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
