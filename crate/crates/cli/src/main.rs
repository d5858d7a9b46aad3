use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use helmscat::Error;
use helmscat_cli::commands::{run_converge, run_oa, run_solve, run_sweep, OutputOptions};
use helmscat_cli::config::load_config;
use helmscat_cli::exit_code;

/// Overlapped FEM-BEM solver for 2D Helmholtz scattering.
#[derive(Parser, Debug)]
#[command(name = "helmscat", version)]
struct Cli {
    /// Worker threads for the direction fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of far-field angles (overrides `output.angles`).
    #[arg(long)]
    angles: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one incidence and write far field, DSCS and overlap mismatch.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// GMRES iteration counts across refinement levels and N.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Comma-separated list of N (default: N and 2N from the config).
        #[arg(long = "N", value_delimiter = ',')]
        ns: Vec<usize>,
    },
    /// Reference-solution convergence table.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Comma-separated list of N (default: N from the config).
        #[arg(long = "N", value_delimiter = ',')]
        ns: Vec<usize>,
    },
    /// Orientation-averaged DSCS.
    #[command(alias = "oa-dscs")]
    Oa {
        #[command(flatten)]
        common: Common,
        /// Number of incident directions (overrides `output.directions`).
        #[arg(long)]
        directions: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<serde_json::Value, Error> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config(vec!["--threads must be at least 1".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(vec![format!("cannot set up {t} threads: {e}")]))?;
    }
    let common = match &cli.command {
        Command::Solve { common } | Command::Sweep { common, .. } | Command::Converge { common, .. } | Command::Oa { common, .. } => common,
    };
    let cfg = load_config(&common.config)?;
    let out = OutputOptions::from_config(&cfg, common.out.clone(), common.angles)?;
    let n = cfg.discretization.n;
    match &cli.command {
        Command::Solve { .. } => run_solve(&cfg, &out),
        Command::Sweep { depth, ns, .. } => {
            let ns = if ns.is_empty() { vec![n, 2 * n] } else { ns.clone() };
            run_sweep(&cfg, &out, *depth, &ns)
        }
        Command::Converge { depth, ns, .. } => {
            let ns = if ns.is_empty() { vec![n] } else { ns.clone() };
            run_converge(&cfg, &out, *depth, &ns)
        }
        Command::Oa { directions, .. } => run_oa(&cfg, &out, directions.unwrap_or(cfg.output.directions)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HELMSCAT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()) as u8)
        }
    }
}
