mod commands;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Options};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Checks for Maurer–Cartan elements, trace maps and Chern characters of perfect complexes.
#[derive(Debug, Parser)]
#[command(name = "ivb", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "builtin")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name; `list` prints the names.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long, default_value_t = 6)]
    degree_bound: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Number of generated instances when no scenario is given.
    #[arg(long, default_value_t = 12)]
    size: usize,
    /// Fix the simplex dimension of generated instances.
    #[arg(long)]
    n: Option<usize>,
    /// Print the scenario file of the built-in instead of running a command.
    #[arg(long, requires = "builtin")]
    dump: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.builtin.as_deref() == Some("list") {
        for n in commands::builtin_names() {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    let (input, label) = match (&cli.scenario, &cli.builtin) {
        (Some(p), _) => {
            let text = match std::fs::read_to_string(p) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            };
            match scenario::parse(&text).and_then(|s| scenario::load(&s)) {
                Ok(x) => (Some(x), p.display().to_string()),
                Err(e) => {
                    eprintln!("error: {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
        }
        (None, Some(name)) => {
            if cli.dump {
                return match commands::builtin_scenario(name) {
                    Some(s) => {
                        println!("{}", scenario::to_pretty(&s));
                        ExitCode::SUCCESS
                    }
                    None => {
                        eprintln!("error: unknown built-in `{name}`");
                        ExitCode::from(2)
                    }
                };
            }
            match commands::builtin(name) {
                Some(x) => (Some(x), format!("builtin:{name}")),
                None => {
                    eprintln!("error: unknown built-in `{name}` (try --builtin list)");
                    return ExitCode::from(2);
                }
            }
        }
        (None, None) => (None, "generated".to_string()),
    };
    let opts = Options { degree_bound: cli.degree_bound, seed: cli.seed, size: cli.size, n: cli.n };
    let report = commands::run(cli.command, input.as_ref(), &label, &opts);
    match cli.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
