use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rgflow::experiments::config::RunConfig;
use rgflow::experiments::runs::{output_dir, run, Command};

const EXIT_CONFIG: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "rgflow", version, about = "RG flows and direct solves for nonlinear integral equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the kernel hypotheses numerically
    ValidateKernel { config: PathBuf },
    /// Linear RG flow against the linear direct solve
    LinearDemo { config: PathBuf },
    /// Full nonlinear RG flow
    RgRun { config: PathBuf },
    /// Direct time marching of the original equation
    OracleRun { config: PathBuf },
    /// Renormalized data from the RG flow against the direct solve
    Compare { config: PathBuf },
    /// Linear contraction of mean-zero data for L = 2, 4, 8
    ContractionStudy { config: PathBuf },
    /// Print the theory constants
    Constants { config: PathBuf },
}

impl Cmd {
    fn split(&self) -> (Command, &PathBuf) {
        match self {
            Cmd::ValidateKernel { config } => (Command::ValidateKernel, config),
            Cmd::LinearDemo { config } => (Command::LinearDemo, config),
            Cmd::RgRun { config } => (Command::RgRun, config),
            Cmd::OracleRun { config } => (Command::OracleRun, config),
            Cmd::Compare { config } => (Command::Compare, config),
            Cmd::ContractionStudy { config } => (Command::ContractionStudy, config),
            Cmd::Constants { config } => (Command::Constants, config),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, path) = cli.command.split();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}:{}: {}", path.display(), e.line, e.message);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = output_dir(&cfg);
    let outcome = match run(cmd, &cfg, &dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {cmd}: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    for w in &outcome.warnings {
        eprintln!("{w}");
    }
    print!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if let Some(e) = &outcome.failure {
        eprintln!("error: {cmd}: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    if !outcome.passed {
        eprintln!("{cmd}: check failed");
        return ExitCode::from(EXIT_FAILURE);
    }
    ExitCode::SUCCESS
}
