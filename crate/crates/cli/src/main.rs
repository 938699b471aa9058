use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use exec_solver::{run, ConfigError, Entries, RunConfig, RunError};

/// Optimal liquidation under transient Volterra impact. Flags override the
/// matching config keys. Set EXEC_SOLVER_LOG (error, warn, info, debug) for
/// progress output.
#[derive(Debug, Parser)]
#[command(name = "exec-solver", version)]
struct Cli {
    /// Key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// solve, sweep, compare or mc.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid steps.
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", cli.config.display())))?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    let mut entries = Entries::parse(&text, &base)?;
    if let Some(m) = &cli.mode {
        entries.set("mode", m.as_str());
    }
    if let Some(o) = &cli.out {
        // taken as given, not relative to the config
        let dir = std::env::current_dir().map(|d| d.join(o)).unwrap_or_else(|_| o.clone());
        entries.set("output_dir", dir.display().to_string());
    }
    if let Some(s) = cli.seed {
        entries.set("seed", s.to_string());
    }
    if let Some(n) = cli.grid_n {
        entries.set("grid.n", n.to_string());
    }
    RunConfig::from_entries(entries)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EXEC_SOLVER_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = load(&cli).map_err(RunError::from).and_then(|config| run(&config));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("exec-solver: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
