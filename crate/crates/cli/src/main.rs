use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod failure;
mod pretty;

use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "nonsig",
    version,
    about = "Exact simulation of networks of nonsignaling resources"
)]
struct Cli {
    /// Human-readable tables instead of JSON
    #[arg(long, global = true)]
    pretty: bool,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check resources, trees and the assembled network of a scenario
    Validate { scenario: PathBuf },
    /// Joint distribution over all resource outputs
    Joint {
        scenario: PathBuf,
        /// Settings tuple such as `0,1,0`; all tuples when omitted
        #[arg(long)]
        settings: Option<String>,
        /// Evaluate even when resources fail the nonsignaling check
        #[arg(long)]
        allow_unnormalized: bool,
    },
    /// Induced behavior as a resource file
    Behavior {
        scenario: PathBuf,
        /// Fail unless the behavior passes the exact nonsignaling check
        #[arg(long)]
        check_nosig: bool,
        /// Write the behavior here instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Convex decomposition into vertices, or a separating functional
    Decompose {
        resource: PathBuf,
        /// `local`, `ns222`, or a JSON file listing vertex resources
        #[arg(long, default_value = "local")]
        vertices: String,
    },
    /// Tripartite correlation inequalities
    Ineq {
        #[command(subcommand)]
        command: IneqCommand,
    },
    /// GHZ-state measurement strategies
    Ghz {
        #[command(subcommand)]
        command: GhzCommand,
    },
}

#[derive(Debug, Subcommand)]
enum IneqCommand {
    /// Evaluate an inequality on a behavior file
    Eval {
        #[arg(long, value_enum)]
        ineq: IneqName,
        #[arg(long)]
        behavior: PathBuf,
    },
    /// Check each step deriving the tripartite inequalities
    Derive,
}

#[derive(Debug, Subcommand)]
enum GhzCommand {
    /// Grid search plus refinement for the largest left-hand side
    Search {
        #[arg(long, value_enum, default_value = "mao")]
        ineq: IneqName,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        refine: f64,
    },
    /// Behavior of a strategy, as a resource file
    Eval {
        /// Strategy JSON file with an `angles` map, or inline `a0,a1,b0,b1,c0,c1`
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
        /// Write the behavior here instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IneqName {
    Mao,
    CrProb,
    CrCorr,
    Cao,
    CaoS14,
    CaoS14Linear,
    MaoRelabeled,
    MaoRelabeledSwapped,
    A0c0Trivial,
}

/// Result of a command: JSON for the default mode, text for `--pretty`,
/// and the exit code (0 or 1).
pub struct Report {
    pub json: serde_json::Value,
    pub text: String,
    pub ok: bool,
    /// Where the JSON goes instead of stdout.
    pub output: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Validate { scenario } => commands::validate(scenario),
        Command::Joint {
            scenario,
            settings,
            allow_unnormalized,
        } => commands::joint(scenario, settings.as_deref(), *allow_unnormalized),
        Command::Behavior {
            scenario,
            check_nosig,
            output,
        } => commands::behavior(scenario, *check_nosig, output.clone()),
        Command::Decompose { resource, vertices } => commands::decompose(resource, vertices),
        Command::Ineq { command } => match command {
            IneqCommand::Eval { ineq, behavior } => commands::ineq_eval(*ineq, behavior),
            IneqCommand::Derive => Ok(commands::ineq_derive()),
        },
        Command::Ghz { command } => match command {
            GhzCommand::Search { ineq, grid, refine } => {
                commands::ghz_search(*ineq, *grid, *refine)
            }
            GhzCommand::Eval { angles, output } => commands::ghz_eval(angles, output.clone()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(report) => {
            let json = serde_json::to_string_pretty(&report.json).expect("serializable") + "\n";
            match &report.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &json) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    if cli.pretty {
                        print!("{}", report.text);
                    }
                }
                None if cli.pretty => print!("{}", report.text),
                None => print!("{json}"),
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
