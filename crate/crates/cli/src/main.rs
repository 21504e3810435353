use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gp_acquire_cli::commands::{self, Format, OutputOptions, SteadyParams};
use gp_acquire_cli::config::load_config;
use gp_acquire_cli::verify::Suite;
use gp_acquire_cli::CliError;

/// Optimal signal precisions for tracking a Gaussian-process state.
#[derive(Parser)]
#[command(name = "gp-acquire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (TOML).
    config: PathBuf,
    /// Directory to write `<name>.csv` / `<name>.svg` into; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the seed of every scenario in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for batch configs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal precisions and variances per step.
    Precisions(RunArgs),
    /// Simulated path, signals and posterior bands per stage.
    Simulate(RunArgs),
    /// Cross-check closed forms against brute-force oracles.
    Verify {
        /// myopic-oracle, matrix-vs-recursion, planning-dp, kernel-limits or all.
        suite: String,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Myopic vs forward-looking steady state on an evenly spaced grid.
    Steady {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma0: f64,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Precisions(args) => {
            let (scenarios, opts) = prepare(&args)?;
            commands::cmd_precisions(&scenarios, &opts, args.jobs, out)
        }
        Command::Simulate(args) => {
            let (scenarios, opts) = prepare(&args)?;
            commands::cmd_simulate(&scenarios, &opts, args.jobs, out)
        }
        Command::Verify { suite, seed, jobs } => {
            check_jobs(jobs)?;
            let suites = Suite::parse(&suite).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown suite `{suite}`; expected myopic-oracle, matrix-vs-recursion, planning-dp, kernel-limits or all"
                ))
            })?;
            commands::cmd_verify(&suites, seed, jobs, out)
        }
        Command::Steady {
            sigma,
            c,
            dt,
            delta,
            sigma0,
        } => commands::cmd_steady(
            &SteadyParams {
                sigma,
                dt,
                c,
                delta,
                sigma0,
            },
            out,
        ),
    }
}

fn check_jobs(jobs: usize) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Config("--jobs: must be at least 1".into()));
    }
    Ok(())
}

fn prepare(args: &RunArgs) -> Result<(Vec<gp_acquire_cli::config::NamedScenario>, OutputOptions), CliError> {
    check_jobs(args.jobs)?;
    let mut scenarios = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        scenarios.iter_mut().for_each(|s| s.scenario.seed = seed);
    }
    Ok((
        scenarios,
        OutputOptions {
            dir: args.output.clone(),
            format: args.format,
        },
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("gp-acquire: {e}");
            e.exit_code()
        }
    }
}
