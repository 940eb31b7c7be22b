use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superint_cli::{execute, json, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "superint", version, about = "Check integrals of motion, spectra and oracles for block Kepler-Coulomb models")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run every applicable identity suite.
    Verify(Args),
    /// Enumerate energy levels with multiplicities.
    Spectrum(Args),
    /// Evaluate the eigenfunction at the configured points.
    Wavefunction(Args),
    /// Compare closed forms with finite-difference eigenvalues.
    Oracle(Args),
    /// All of the above in one document.
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jet_order: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cmd: Command, args: Args) -> Result<u8, CliError> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    let v = &mut cfg.verification;
    if let Some(s) = args.seed {
        v.seed = s;
    }
    if let Some(k) = args.jet_order {
        v.jet_order = k;
        v.degree = Some(v.degree.unwrap_or(k).max(k));
    }
    if let Some(n) = args.samples {
        v.samples = n;
    }
    if let Some(t) = args.tolerance {
        v.tolerance = Some(t);
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    cfg.validate()?;
    let outcome = execute(cmd, &cfg)?;
    let text = json::to_string(&outcome.report).expect("report serializes");
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Write {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => print!("{text}"),
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Wavefunction(a) => (Command::Wavefunction, a),
        Sub::Oracle(a) => (Command::Oracle, a),
        Sub::Report(a) => (Command::Report, a),
    };
    match run(cmd, args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
