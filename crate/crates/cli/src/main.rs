//! `opred`: generate opaque predicates, run the gate-count experiments, and
//! drive the kleptography and watermarking case studies.

mod error;
mod gen;
mod klepto;
mod wm;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "opred", version, about = "Opaque predicates from FSM state registers")]
struct Cli {
    /// Machine-readable JSON on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SeedArg {
    /// RNG seed; a random one is chosen and printed when absent.
    #[arg(long, env = "OPRED_SEED")]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one opaque predicate.
    Gen(gen::GenArgs),
    /// Encode an existing FSM so some register bits hold a constant.
    Encode(gen::EncodeArgs),
    /// Run the gate-count experiment grid.
    Table(gen::TableArgs),
    /// Backdoored RSA key generation and recovery.
    #[command(subcommand)]
    Klepto(klepto::KleptoCommand),
    /// LUT watermark workflows.
    #[command(subcommand)]
    Wm(wm::WmCommand),
}

/// What a subcommand prints: text for people, JSON for scripts.
pub struct Report {
    pub text: String,
    pub json: Value,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

pub fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Gen(a) => gen::gen(a),
        Command::Encode(a) => gen::encode(a),
        Command::Table(a) => gen::table(a),
        Command::Klepto(c) => klepto::run(c),
        Command::Wm(c) => wm::run(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(report) => {
            let out = if json {
                serde_json::to_string_pretty(&report.json).expect("JSON values serialize") + "\n"
            } else {
                report.text
            };
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if json {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            }
            ExitCode::from(e.exit_code())
        }
    }
}
