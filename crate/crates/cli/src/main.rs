use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collective::experiment::{exit_code, gates, parse_budgets, read_config, run, ExperimentConfig};
use collective::{Error, Result};

/// Collective surrogates for affine-parametric diffusion.
#[derive(Parser)]
#[command(name = "collective", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build surrogates for every budget, measure errors and write the report.
    Run(Common),
    /// Print constants and admissibility checks for the configured model.
    Gates(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory, overriding `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated budgets, overriding `budgets` in the config.
    #[arg(long)]
    budgets: Option<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = read_config(&c.config)?;
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(b) = &c.budgets {
        cfg.budgets = parse_budgets(b)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let (Command::Run(common) | Command::Gates(common)) = &cli.command;
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let cfg = load(common)?;
    match cli.command {
        Command::Gates(_) => {
            let report = gates(&cfg)?;
            print!("{}", report.render());
            if !report.passed() {
                let reason = report.verdict(cfg.method).reason.clone().unwrap_or_default();
                return Err(Error::Gate(format!("{} not admissible: {reason}", cfg.method)));
            }
            Ok(())
        }
        Command::Run(_) => {
            let summary = run(&cfg, |line| println!("{}", line.trim_end()))?;
            println!("wrote {}", summary.csv.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
