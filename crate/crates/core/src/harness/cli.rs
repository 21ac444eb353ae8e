//! Command-line front end. Exit codes: 0 success, 1 configuration or usage
//! error, 2 runtime failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::RunConfig;
use super::{run, selftest, HarnessError};

#[derive(Parser)]
#[command(
    name = "saruav",
    version,
    about = "Desk-scale UAV search-and-rescue training and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy; emits episode records, traces and checkpoints.
    Train(RunArgs),
    /// Evaluate a checkpoint with the policy frozen.
    Eval(EvalArgs),
    /// Run the built-in invariant suites.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Survivor scenario: e1 (static), e2 (reactive) or e3 (reactive,
    /// placed against an obstacle).
    #[arg(long)]
    scenario: Option<String>,
    /// Algorithm: proposed, td3 or ddpg.
    #[arg(long)]
    algo: Option<String>,
    /// Episodes per seed.
    #[arg(long)]
    episodes: Option<usize>,
    /// Step limit per episode.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Run seed; repeat the flag to cover several seeds.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Flat `key = value` config file with world.*, agent.*, reward.* and
    /// weights.* keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shrink to a desk-scale run: 60 m arena, 3 obstacles, [64, 64]
    /// networks, 300 episodes.
    #[arg(long)]
    desk_preset: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint produced by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

fn resolve(args: &RunArgs, eval: bool) -> Result<RunConfig, HarnessError> {
    let mut cfg = if eval {
        RunConfig::eval_defaults()
    } else {
        RunConfig::train_defaults()
    };
    if args.desk_preset {
        cfg.apply_desk_preset(!eval);
    }
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    if let Some(s) = &args.scenario {
        cfg.scenario = s.parse().map_err(HarnessError::Config)?;
    }
    if let Some(a) = &args.algo {
        if eval {
            return Err(HarnessError::Config(
                "--algo is read from the checkpoint when evaluating".into(),
            ));
        }
        cfg.algo = a.parse().map_err(HarnessError::Config)?;
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = episodes;
    }
    if let Some(max_steps) = args.max_steps {
        cfg.world.max_steps = max_steps;
    }
    if !args.seeds.is_empty() {
        cfg.seeds = args.seeds.clone();
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    cfg.finalize()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(args) => {
            let cfg = resolve(&args, false)?;
            run::run_training(&cfg)?;
            Ok(())
        }
        Command::Eval(args) => {
            let cfg = resolve(&args.run, true)?;
            run::run_eval(&cfg, &args.checkpoint)?;
            Ok(())
        }
        Command::Selftest => selftest::run_selftest(),
    }
}

/// Parse `argv` and run. Returns the process exit code instead of exiting
/// so tests can drive it in-process.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land on stdout with success; real usage
            // errors are configuration mistakes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
