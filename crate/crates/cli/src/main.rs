use clap::{Parser, Subcommand};
use krf_cli::{commands, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "krf",
    about = "Normalized Ricci flow laboratory on the rotationally symmetric sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow and write trajectory, summary, and snapshots
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed echo for artifact provenance (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Solve the del-bar spectrum of the configured initial metric
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Validate a curvature tensor record and run the eigenvalue bounds
    Curvop {
        file: PathBuf,
        /// Scalar curvature bound for the chain checks
        #[arg(long, default_value_t = 10.0)]
        bound: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Check a (g, J) pair for Hermitian compatibility
    Compat {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Run a list of configs into isolated output directories
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed, quiet } => {
            load_config(&config, seed).map(|(cfg, dir)| {
                let dir = out.unwrap_or(dir);
                commands::run(&cfg, &dir, quiet)
            })
        }
        Command::Spectrum { config, out, quiet } => load_config(&config, None).map(|(cfg, dir)| {
            let dir = out.unwrap_or(dir);
            commands::spectrum(&cfg, &dir, quiet)
        }),
        Command::Curvop { file, bound, out, quiet } => {
            Ok(commands::curvop(&file, bound, &out, quiet))
        }
        Command::Compat { file, out, quiet } => Ok(commands::compat(&file, &out, quiet)),
        Command::Sweep { config, out, parallel, quiet } => {
            Ok(commands::sweep(&config, &out, parallel, quiet))
        }
    };
    let code = match result {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            1
        }
        Err(code) => code,
    };
    ExitCode::from(code as u8)
}

fn load_config(
    path: &PathBuf,
    seed_override: Option<u64>,
) -> Result<(RunConfig, PathBuf), i32> {
    match RunConfig::from_path(path) {
        Ok(mut cfg) => {
            if let Some(seed) = seed_override {
                cfg.seed = seed;
            }
            let dir = PathBuf::from(cfg.output.dir.clone());
            Ok((cfg, dir))
        }
        Err(e) => {
            eprintln!("config error: {e:#}");
            Err(commands::EXIT_CONFIG)
        }
    }
}
