use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use fskyrme_core::config::parse_config;
use fskyrme_core::error::Error;
use fskyrme_core::run::{run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Minimize,
    Invariants,
    Identities,
    Convergence,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Minimize => Command::Minimize,
            Sub::Invariants => Command::Invariants,
            Sub::Identities => Command::Identities,
            Sub::Convergence => Command::Convergence,
        }
    }
}

/// Lattice Faddeev-Skyrme workbench.
#[derive(Debug, Parser)]
#[command(name = "fskyrme", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Sub,

    /// `key = value` run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for the compute kernels.
    #[arg(long, env = "FSKYRME_THREADS")]
    threads: Option<usize>,
}

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| Error::io(&cli.config, e))?;
    let cfg = parse_config(&text)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let cmd = Command::from(cli.subcommand);
    let outcome = run(cmd, &cfg, &out)?;
    println!("{}: {}", cmd.name(), outcome.summary);
    for f in &outcome.files {
        println!("  wrote {}", f.display());
    }
    println!("{}", if outcome.passed { "PASS" } else { "FAIL" });
    Ok(outcome.passed)
}
