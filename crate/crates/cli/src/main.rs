use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drs_lip_cli::{run, CliError, Command, Config, RunOptions};

/// Pendulum-on-a-moving-surface toolkit: analytic solutions, reference
/// integration, stability sweeps and gait planning.
#[derive(Debug, Parser)]
#[command(name = "drs-lip", version)]
struct Cli {
    /// TOML configuration, or a JSON manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for random initial conditions and post-check sampling
    /// [default: the manifest's seed, else 1].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Evaluate the analytic solution from one initial state.
    Solve,
    /// Compare the analytic solution with the integrator on random states.
    Compare,
    /// Classify stability over a parameter grid.
    Stability,
    /// Plan one walking cycle on the moving surface.
    Plan,
    /// Time analytic against numeric workloads.
    Bench,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Compare => Command::Compare,
            Cmd::Stability => Command::Stability,
            Cmd::Plan => Command::Plan,
            Cmd::Bench => Command::Bench,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("drs-lip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let (config, recorded) = match &cli.config {
        Some(path) => Config::load_with_seed(path)?,
        None => (Config::default(), None),
    };
    let opts = RunOptions {
        config,
        seed: cli.seed.or(recorded).unwrap_or(1),
        out: cli.out.clone(),
    };
    run(cli.command.into(), &opts)
}
