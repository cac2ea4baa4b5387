use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fracopt_cli::{commands, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fracopt", version, about = "Surfing phase-field fracture simulations and toughness optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set simulation.domain.lx=40`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed of the optimizer.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation of the configured design and crack offset.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write VTK files of the phase field and displacement after every step.
        #[arg(long)]
        dump_fields: bool,
    },
    /// Evaluate a grid over one or two design parameters.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run the optimization campaign.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Recompute the effective toughness of an existing trace.csv.
    Report {
        #[command(flatten)]
        common: Common,
        trace: PathBuf,
    },
    /// Print the effective configuration and its hash.
    Config {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref(), &common.overrides)?;
    if let Some(s) = common.seed {
        cfg.campaign.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().context("starting the worker pool")?;
    }
    Ok(cfg)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<Option<fracopt_cli::Outcome>> {
        Ok(Some(match &cli.command {
            Command::Simulate { common, dump_fields } => {
                let cfg = load(common)?;
                commands::simulate(&cfg, &cfg.hash(), *dump_fields)?
            }
            Command::Sweep { common } => {
                let cfg = load(common)?;
                commands::sweep(&cfg, &cfg.hash())?
            }
            Command::Optimize { common, resume } => {
                let cfg = load(common)?;
                commands::optimize(&cfg, &cfg.hash(), *resume)?
            }
            Command::Report { common, trace } => {
                let cfg = load(common)?;
                commands::report(&cfg, &cfg.hash(), trace)?
            }
            Command::Config { common } => {
                let cfg = load(common)?;
                println!("# config_hash: {}", cfg.hash());
                print!("{}", cfg.to_toml());
                return Ok(None);
            }
        }))
    };
    match run() {
        Ok(Some(outcome)) => {
            println!("{}", outcome.to_json());
            std::process::exit(outcome.status.exit_code());
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            println!("{}", serde_json::json!({ "status": "error", "reason": format!("{e:#}") }));
            std::process::exit(1);
        }
    }
}
