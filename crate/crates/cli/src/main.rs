//! `horoflow`: command-line experiments on horocycle flows over Schottky
//! surfaces.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
//! 3 ping-pong certificate failure, 4 experiment precondition rejected,
//! 5 numerical failure.

mod acceptance;
mod config;
mod experiments;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable that overrides `output.dir` of a config.
pub const OUT_ENV: &str = "HOROFLOW_OUT";

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<horoflow::Error> for Failure {
    fn from(e: horoflow::Error) -> Self {
        use horoflow::Error::*;
        let code = match e {
            Certificate(_) => 3,
            Precondition(_) | InvalidArgument(_) => 4,
            NoConvergence { .. } | Singular(_) | ReductionCap { .. } => 5,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "horoflow",
    version,
    about = "Horocycle flows on flat projective bundles over Schottky surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the limit set from attracting fixed points of words.
    LimitSet(RunArgs),
    /// Sample the projective limit set of a representation.
    ProjLimitSet(RunArgs),
    /// Sample the minimal set of pairs (gamma^+, chi_rho(gamma)).
    MinimalSet(RunArgs),
    /// Check the proximality (CG2) and irreducibility (CG1) conditions.
    CheckCg(RunArgs),
    /// Equivariance residual of the Veronese limit map.
    CheckN(RunArgs),
    /// Contraction constants of a proximal word near its attracting point.
    Contraction(RunArgs),
    /// Flow seeded starts along the foliated horocycle and record fiber distances.
    Attractor(RunArgs),
    /// Density of a single orbit in the minimal set.
    OrbitClosure(RunArgs),
    /// Find two hyperbolic words with a dense multiplier group.
    TwoHyperbolic(RunArgs),
    /// Iterate (gamma^k xi, A^k chi) towards the attracting pair.
    KeyLemma(RunArgs),
    /// Lorentz-model checks on the limit set.
    Lorentz(RunArgs),
    /// Run the acceptance suite.
    Acceptance(AcceptanceArgs),
    /// Render plot.svg from an existing trace.jsonl.
    RenderSvg(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory; overrides the environment and the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized experiments; replaces params.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
pub struct AcceptanceArgs {
    /// Skip the slow oracle reruns.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = horoflow::acceptance::DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for acceptance.json.
    #[arg(long, value_name = "DIR", default_value = "out/acceptance")]
    pub out: PathBuf,
    /// Skip the determinism criterion (used by the criterion itself).
    #[arg(long, hide = true)]
    pub no_determinism: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_name = "FILE")]
    trace: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::LimitSet(a) => run_experiment("limit-set", a),
        Command::ProjLimitSet(a) => run_experiment("proj-limit-set", a),
        Command::MinimalSet(a) => run_experiment("minimal-set", a),
        Command::CheckCg(a) => run_experiment("check-cg", a),
        Command::CheckN(a) => run_experiment("check-n", a),
        Command::Contraction(a) => run_experiment("contraction", a),
        Command::Attractor(a) => run_experiment("attractor", a),
        Command::OrbitClosure(a) => run_experiment("orbit-closure", a),
        Command::TwoHyperbolic(a) => run_experiment("two-hyperbolic", a),
        Command::KeyLemma(a) => run_experiment("key-lemma", a),
        Command::Lorentz(a) => run_experiment("lorentz", a),
        Command::Acceptance(a) => acceptance::run(&a),
        Command::RenderSvg(a) => render(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}

fn run_experiment(name: &str, args: RunArgs) -> Result<ExitCode, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.config.display())))?;
    let loaded = config::load(&text, args.seed)?;
    if loaded.config.experiment != name {
        return Err(Failure::config(format!(
            "config is for experiment {:?}, not {name:?}",
            loaded.config.experiment
        )));
    }
    let dir = args
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| loaded.config.output.dir.clone())
        .unwrap_or_else(|| Path::new("out").join(name));
    let artifacts = experiments::run(&loaded.config)?;
    output::write(&dir, &loaded, &artifacts)?;
    println!("{name}: {} ({})", artifacts.verdict, dir.display());
    Ok(ExitCode::SUCCESS)
}

fn render(args: &RenderArgs) -> Result<ExitCode, Failure> {
    let text = std::fs::read_to_string(&args.trace).map_err(|e| Failure::io(&args.trace, e))?;
    let records = output::parse_trace(&text).map_err(|e| Failure::config(format!("{}: {e}", args.trace.display())))?;
    let Some(doc) = svg::render(&records) else {
        return Err(Failure::config("trace has no plottable records"));
    };
    std::fs::write(&args.out, doc).map_err(|e| Failure::io(&args.out, e))?;
    Ok(ExitCode::SUCCESS)
}
