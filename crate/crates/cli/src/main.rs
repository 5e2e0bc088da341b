mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kolyrec_core::suite::{basis_table, run_suite, show_class, ClassKind, SuiteReport};
use kolyrec_core::{CoreError, Engine};

use config::{resolve, FileConfig, Format, PoolArgs};

#[derive(Parser, Debug)]
#[command(name = "kolyrec", version, about = "Verify universal Kolyvagin classes and the canonical basis at finite level")]
struct Cli {
    /// TOML file with pool settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the verification suite.
    Verify {
        #[command(flatten)]
        pool: PoolArgs,
        /// Check names, comma separated, or "all".
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Record wall time per check (makes output run-dependent).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transition matrix from the canonical basis to the universal classes at level r.
    Basis {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a universal or canonical class at level r.
    Class {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long, value_enum, default_value = "universal")]
        kind: KindArg,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a saved JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum KindArg {
    Universal,
    Canonical,
}

enum Failure {
    Config(String),
    Internal(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(Failure::Config)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Verify { pool, checks, timings, out } => {
            let cfg = resolve(&file, &pool, checks, timings).map_err(Failure::Config)?;
            let report = run_suite(&cfg.suite)?;
            let text = render::suite(&report, cfg.format).map_err(Failure::Internal)?;
            emit(&text, out.as_ref())?;
            if report.exit_code() == 3 {
                for r in report.reports.iter().filter(|r| r.internal) {
                    eprintln!("internal contradiction in {} {:?}: {}", r.name, r.params, r.details["error"]);
                }
            }
            Ok(report.exit_code())
        }
        Command::Basis { pool, r, out } => {
            let cfg = resolve(&file, &pool, None, false).map_err(Failure::Config)?;
            let engine = Engine::new(cfg.suite.context()?);
            let (divisors, matrix) = basis_table(&engine, r)?;
            let text = render::basis(cfg.suite.modulus, r, &divisors, &matrix, cfg.format).map_err(Failure::Internal)?;
            emit(&text, out.as_ref())?;
            Ok(0)
        }
        Command::Class { pool, kind, r, out } => {
            let cfg = resolve(&file, &pool, None, false).map_err(Failure::Config)?;
            let engine = Engine::new(cfg.suite.context()?);
            let kind = match kind {
                KindArg::Universal => ClassKind::Universal,
                KindArg::Canonical => ClassKind::Canonical,
            };
            let view = show_class(&engine, kind, r)?;
            emit(&render::class(&view, cfg.format).map_err(Failure::Internal)?, out.as_ref())?;
            Ok(0)
        }
        Command::Report { input, format, out } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
            let report: SuiteReport =
                serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
            emit(&render::suite(&report, format).map_err(Failure::Internal)?, out.as_ref())?;
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal contradiction: {msg}");
            ExitCode::from(3)
        }
    }
}
