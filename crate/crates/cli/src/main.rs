use std::path::PathBuf;
use std::process::ExitCode;

use afmass_cli::{execute, write_error_report, CliError, Command, RunConfig};
use clap::{Parser, Subcommand};

/// Mass functionals of asymptotically flat metrics and cone surfaces.
#[derive(Parser, Debug)]
#[command(name = "afmass", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Angular resolution per sphere angle; overrides the config.
    #[arg(long, global = true)]
    quadrature: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true, env = "AFMASS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// ADM mass by flux extrapolation.
    AdmMass,
    /// F_g on coordinate spheres, with its limit when defined.
    FgProfile,
    /// Divergence-form mass, matter integral and their defect.
    WeightedMass,
    /// Semicontinuity experiment on a built-in sequence.
    Sequence,
    /// Cone mass 1 − α of a conical surface.
    ConeAngle,
    /// Semicontinuity experiment for cone surfaces.
    ConeSequence,
    /// Run the command named in the config file.
    Run,
}

impl Sub {
    fn command(self) -> Option<Command> {
        match self {
            Sub::AdmMass => Some(Command::AdmMass),
            Sub::FgProfile => Some(Command::FgProfile),
            Sub::WeightedMass => Some(Command::WeightedMass),
            Sub::Sequence => Some(Command::Sequence),
            Sub::ConeAngle => Some(Command::ConeAngle),
            Sub::ConeSequence => Some(Command::ConeSequence),
            Sub::Run => None,
        }
    }
}

fn run(cli: &Cli) -> Result<afmass_cli::Outcome, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::ConfigInvalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::ConfigInvalid(format!("thread pool: {e}")))?;
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::ConfigInvalid("--config <path> is required".into()))?;
    let config = RunConfig::load(path)?.with_quadrature(cli.quadrature);
    execute(cli.command.command(), config, &cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = write_error_report(&cli.out, &e) {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
