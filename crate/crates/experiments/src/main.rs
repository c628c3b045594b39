//! `qflab` — batch driver for reproducible quantum-filtering experiments.
//!
//! Exit codes: 0 success, 2 config error, 3 numeric/i-o failure,
//! 4 acceptance failure. Failures also emit one machine-readable JSON line
//! on stderr.

use clap::{Parser, Subcommand};
use qflab_cli::{acceptance, config, registry, runner, CliError};

#[derive(Parser)]
#[command(name = "qflab", version, about = "Quantum filtering laboratory: seeded experiments, Ito-calculus tools, and the acceptance suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config file.
    Run {
        /// Path to the config file.
        config: String,
        /// Output directory (overrides config and QFLAB_OUTPUT_DIR).
        #[arg(long)]
        output_dir: Option<String>,
    },
    /// List the available experiments.
    List,
    /// Run the acceptance suite (all criteria, or one with --only).
    Acceptance {
        /// Run a single criterion, e.g. 04-ito-table-goldens.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        output_dir: Option<String>,
    },
    /// Increment-level Ito calculus tools.
    Ito {
        #[command(subcommand)]
        command: ItoCommand,
    },
}

#[derive(Subcommand)]
enum ItoCommand {
    /// Parse an increment expression and print its canonical form.
    Simplify { expr: String },
    /// Print the quantum Ito multiplication table.
    Table,
}

fn fail(err: &CliError) -> ! {
    let json = serde_json::json!({
        "error": { "kind": err.kind(), "message": err.to_string() }
    });
    eprintln!("{json}");
    std::process::exit(err.exit_code());
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output_dir } => {
            let bytes = match std::fs::read(&config) {
                Ok(b) => b,
                Err(e) => fail(&CliError::Io(format!("{config}: {e}"))),
            };
            let text = match String::from_utf8(bytes.clone()) {
                Ok(t) => t,
                Err(e) => fail(&CliError::Config(format!("{config}: {e}"))),
            };
            let parsed = match config::parse_config(&text) {
                Ok(p) => p,
                Err(e) => fail(&e),
            };
            let out_dir = runner::resolve_output_dir(output_dir.as_deref(), &parsed);
            match runner::run_parsed(&parsed, &bytes, &out_dir) {
                Ok(outcome) => {
                    println!(
                        "wrote {} file(s) to {}",
                        outcome.files.len(),
                        outcome.output_dir.display()
                    );
                    if !outcome.rows.is_empty() {
                        let passed = outcome.rows.iter().filter(|r| r.pass).count();
                        println!("checks passed: {passed}/{}", outcome.rows.len());
                        if passed < outcome.rows.len() {
                            fail(&CliError::Numeric(format!(
                                "{} check(s) failed; see checks.csv",
                                outcome.rows.len() - passed
                            )));
                        }
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::List => {
            print!("{}", registry::listing());
        }
        Command::Acceptance { only, output_dir } => {
            let out_dir = output_dir
                .map(std::path::PathBuf::from)
                .unwrap_or_else(acceptance::default_output_dir);
            match acceptance::run_acceptance(&out_dir, only.as_deref()) {
                Ok(report) => {
                    if !report.all_passed {
                        let json = serde_json::json!({
                            "error": { "kind": "acceptance", "message": "one or more criteria failed" }
                        });
                        eprintln!("{json}");
                        std::process::exit(4);
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Ito { command } => match command {
            ItoCommand::Simplify { expr } => match qflab::ito::parse_ito_expr(&expr) {
                Ok(parsed) => println!("{parsed}"),
                Err(e) => fail(&CliError::Config(e.to_string())),
            },
            ItoCommand::Table => {
                print!("{}", qflab::ito::table_text());
            }
        },
    }
}
