use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qnc_cli::{run, CliError, Command};

#[derive(Parser)]
#[command(name = "qnc", version, about = "Construct, simulate and verify quantum network codes")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the code for a Clifford network and report its parameters.
    Construct(RunArgs),
    /// Run the coded network against sampled corruptions and report fidelities.
    Simulate(RunArgs),
    /// Check the coherent-information lower bound on random networks.
    VerifyDirect(RunArgs),
    /// Check the decoded channel under mix substitution.
    VerifyConverse(RunArgs),
    /// Check the classical mutual-information bound.
    VerifyClassical(RunArgs),
    /// Emit a basis-linear network scenario for a rank triple.
    Gen(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; the JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Construct(a) => (Command::Construct, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::VerifyDirect(a) => (Command::VerifyDirect, a),
        Cmd::VerifyConverse(a) => (Command::VerifyConverse, a),
        Cmd::VerifyClassical(a) => (Command::VerifyClassical, a),
        Cmd::Gen(a) => (Command::Gen, a),
    };
    match execute(command, &args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qnc {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, args: &RunArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let outcome = run(command, &text, args.seed, args.samples)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &outcome.json)?;
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.json);
            eprintln!("{}", outcome.summary);
        }
    }
    if !outcome.verdict.passed() {
        eprintln!("qnc {}: verification failed", command.name());
    }
    Ok(outcome.exit_code())
}
