use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levy_survival_cli::{execute, CliError, Problem, RunConfig, Stage, Target};

/// Exit-time survival and quasi-potentials for one-dimensional Lévy processes.
#[derive(Debug, Parser)]
#[command(name = "levy-survival", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads; falls back to LEVY_SURVIVAL_THREADS, then all cores.
    #[arg(long, global = true, env = "LEVY_SURVIVAL_THREADS", value_name = "N")]
    threads: Option<usize>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Monte Carlo seed, overriding `mc.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Process type, support and symmetry.
    Classify,
    /// Kernel property checks plus the tabulated kernel as CSV.
    KernelTable,
    /// Generator and quasi-potential with diagnostics.
    Assemble,
    /// Principal eigenpair, leading spectrum and `c₁`.
    Eigen,
    /// Spectral survival curve on the time grid.
    Survival,
    /// Laplace transform of the survival probability.
    Laplace,
    /// Monte Carlo survival estimate with Wilson intervals.
    McSurvival,
    /// Monte Carlo occupation times per bin.
    McOccupation,
    /// Spectral against Monte Carlo.
    Compare,
    /// Every stage enabled in the configuration.
    Run,
}

impl Command {
    fn target(&self) -> Target {
        match self {
            Command::Classify => Target::Stage(Stage::Classify),
            Command::KernelTable => Target::Stage(Stage::Kernel),
            Command::Assemble => Target::Stage(Stage::Assemble),
            Command::Eigen => Target::Stage(Stage::Eigen),
            Command::Survival => Target::Stage(Stage::Survival),
            Command::Laplace => Target::Stage(Stage::Laplace),
            Command::McSurvival | Command::McOccupation => Target::Stage(Stage::Mc),
            Command::Compare => Target::Stage(Stage::Compare),
            Command::Run => Target::Run,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<i32, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let problem = Problem::new(RunConfig::load(path)?, args.seed)?;
    let outcome = execute(&problem, args.command.target(), &args.out)?;
    for record in &outcome.summary.stages {
        match &record.message {
            Some(m) => eprintln!("{:?}: {} ({m})", record.stage, record.status),
            None => eprintln!("{:?}: {}", record.stage, record.status),
        }
    }
    for check in outcome.summary.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {} (reference {:?}, tolerance {})", check.name, check.value, check.reference, check.tolerance);
    }
    println!("{}", args.out.join("summary.json").display());
    Ok(outcome.exit_code())
}
