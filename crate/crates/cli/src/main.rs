use clap::{Parser, Subcommand};
use corrpic_cli::config::{default_dims, parse_dims, ScenarioConfig};
use corrpic_cli::parallel::thread_cap;
use corrpic_cli::scenario::{asymptotic_population, run, RunOutput};
use corrpic_cli::validate::{run_validation, ValidateOptions};
use corrpic_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "corrpic", version, about = "Correlation-picture open-system dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write one CSV per method
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check the exact generator and parent operator on random instances
    Validate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        instances: usize,
        /// Comma-separated system×bath sizes, e.g. 2x2,2x3,3x3
        #[arg(long, value_delimiter = ',')]
        dims: Vec<String>,
        /// Add a traceful term to χ to show the harness catches it
        #[arg(long)]
        mutate: bool,
    },
    /// Print the asymptotic population of a scenario's model
    Asymptotic {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = thread_cap().map_err(CliError::Config)?;
    match cli.command {
        Command::Run { config, out_dir } => {
            let cfg = ScenarioConfig::load(&config)?;
            match run(&cfg, out_dir.as_deref(), threads)? {
                RunOutput::Csv(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                }
                RunOutput::Report(path, report) => {
                    println!("{report}");
                    println!("{}", path.display());
                    if !report.passed() {
                        return Err(CliError::Numeric("validation failed".into()));
                    }
                }
            }
        }
        Command::Validate { seed, instances, dims, mutate } => {
            let dims = if dims.is_empty() { default_dims() } else { dims };
            let opts = ValidateOptions {
                seed,
                instances,
                dims: dims.iter().map(|s| parse_dims(s)).collect::<Result<_, _>>()?,
                mutate,
                threads,
            };
            let report = run_validation(&opts);
            println!("{report}");
            if !report.passed() {
                return Err(CliError::Numeric("validation failed".into()));
            }
        }
        Command::Asymptotic { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            println!("{:.16e}", asymptotic_population(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("corrpic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
