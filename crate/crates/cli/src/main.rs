use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netred::corpus::{example, EXAMPLE_NAMES};
use netred::engines::NormKind;

use netred_cli::analyze::{analyze, AnalyzeArgs};
use netred_cli::schema::NetworkFile;
use netred_cli::CliError;

/// Clustering-based reduction of leader-follower networks with H2 and H-infinity error bounds.
#[derive(Debug, Parser)]
#[command(name = "netred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a network file and report bounds and true errors as JSON.
    Analyze {
        file: PathBuf,
        /// Comma-separated subset of h2,hinf (default: from the file, else both).
        #[arg(long, value_delimiter = ',', value_parser = parse_norm)]
        norms: Option<Vec<NormKind>>,
        /// Also evaluate the triangle bound; required for partitions that are not almost equitable.
        #[arg(long)]
        triangle: bool,
        /// Cross-check norms against independent computations.
        #[arg(long)]
        oracle_check: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "lyapunov")]
        h2_engine: String,
        #[arg(long, default_value = "sweep")]
        hinf_engine: String,
    },
    /// Print a built-in network file.
    Example {
        /// One of paper-section7, k3-aep, random-aep, random-general.
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    s.parse().map_err(|_| format!("unknown norm `{s}` (expected h2 or hinf)"))
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n"))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => match writeln!(std::io::stdout().lock(), "{json}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { file, norms, triangle, oracle_check, out, h2_engine, hinf_engine } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", file.display())))?;
            let input: NetworkFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
            let args = AnalyzeArgs { norms, triangle, oracle_check, h2_engine, hinf_engine };
            let report = analyze(&input, &args)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            emit(&json, out.as_deref())
        }
        Command::Example { name, seed, out } => {
            let inst = example(&name, seed).map_err(|_| {
                CliError::Validation(format!("unknown example `{name}` (available: {})", EXAMPLE_NAMES.join(", ")))
            })?;
            let json = serde_json::to_string_pretty(&NetworkFile::from_instance(&inst))
                .map_err(|e| CliError::Io(e.to_string()))?;
            emit(&json, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
