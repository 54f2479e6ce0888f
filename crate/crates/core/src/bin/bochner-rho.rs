use std::path::PathBuf;
use std::process::ExitCode;

use bochner_rho::cli_reports::{run, write_outputs, Mode, RunConfig};
use bochner_rho::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Second-order Bergman coefficient of magnetic Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV reports; without it the JSON goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the primary tolerance of the chosen command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed and polar forms at the base point of a field spec.
    Rho,
    /// Closed form against the Fock-space oracle on seeded random fields.
    OracleCompare,
    /// Low cluster statistics of lattice magnetic Laplacians on a torus.
    Torus,
    /// Fock-space and jet identities for one field.
    Identities,
    /// Every identity for n = 1, 2, 3 plus truncation independence.
    Selfcheck,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Rho => Mode::Rho,
            Command::OracleCompare => Mode::OracleCompare,
            Command::Torus => Mode::Torus,
            Command::Identities => Mode::Identities,
            Command::Selfcheck => Mode::Selfcheck,
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let mode = cli.command.mode();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        let t = &mut cfg.tolerances;
        match mode {
            Mode::Rho => t.rho = tol,
            Mode::OracleCompare => t.oracle = tol,
            Mode::Identities | Mode::Selfcheck => t.identity = tol,
            Mode::Torus => {}
        }
    }
    let cfg = cfg.resolved(std::path::Path::new("."))?;
    let outcome = run(mode, &cfg)?;
    if !cli.quiet {
        for line in &outcome.summary {
            eprintln!("{line}");
        }
    }
    match cli.out.as_ref().or(cfg.out.as_ref()) {
        Some(dir) => {
            for path in write_outputs(&outcome, dir)? {
                if !cli.quiet {
                    eprintln!("wrote {}", path.display());
                }
            }
        }
        None => println!("{}", outcome.json),
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
