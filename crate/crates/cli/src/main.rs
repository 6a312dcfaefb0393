//! Command-line front end: build graphs, answer questions, evaluate systems
//! and inspect graphs.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tara_core::ErrorClass;
use thiserror::Error;

use config::{AveragingArg, CliConfig, FileConfig, FlagValues, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tara_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config(_) => "E_CONFIG",
            CliError::Usage(_) => "E_USAGE",
            CliError::Io { .. } => "E_IO",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Domain => 3,
                ErrorClass::Io => 1,
            },
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

macro_rules! core_error {
    ($($t:ty),+) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })+
    };
}

core_error!(
    tara_core::SdpError,
    tara_core::BuildError,
    tara_core::GraphError,
    tara_core::CorpusError
);

#[derive(Debug, Parser)]
#[command(name = "tara", version, about = "Step-and-fact graphs for user manuals")]
struct Cli {
    /// TOML file with threshold, merge_threshold, lexicon, jobs, format and
    /// averaging keys. Its values win over flags.
    #[arg(long, global = true, env = "TARA_CONFIG")]
    config: Option<PathBuf>,
    /// Minimum node similarity for a match.
    #[arg(long, global = true, env = "TARA_THRESHOLD")]
    threshold: Option<f64>,
    /// Minimum label similarity for merging entity mentions.
    #[arg(long, global = true, env = "TARA_MERGE_THRESHOLD")]
    merge_threshold: Option<f64>,
    /// State-verb lexicon, one predicate per line.
    #[arg(long, global = true, env = "TARA_LEXICON")]
    lexicon: Option<PathBuf>,
    /// Worker threads for evaluation (0: one per core).
    #[arg(long, global = true, env = "TARA_JOBS")]
    jobs: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, env = "TARA_FORMAT")]
    format: Option<Format>,
    /// More logging on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build graphs from an SDP document.
    BuildGraph {
        input: PathBuf,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a parsed question against a manual.
    Answer {
        /// Manual as an SDP document or as a graph file.
        #[arg(long)]
        manual: PathBuf,
        /// Question SDP document, `-` for stdin.
        #[arg(long)]
        question: String,
    },
    /// Evaluate a system over a corpus directory.
    Eval {
        corpus: PathBuf,
        #[arg(long, default_value = "hum", env = "TARA_SYSTEM")]
        system: tara_core::SystemKind,
        /// Report file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, env = "TARA_AVERAGING")]
        averaging: Option<AveragingArg>,
    },
    /// Answer a basic question (B1..B9) about a graph.
    Inspect {
        graph: PathBuf,
        question: tara_core::BasicQuestion,
        /// Element ids (`n3`, `a1`) the question takes.
        ids: Vec<String>,
        /// Which graph of the file to use.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let averaging = match &cli.command {
        Command::Eval { averaging, .. } => *averaging,
        _ => None,
    };
    let cfg = CliConfig::resolve(
        file,
        FlagValues {
            threshold: cli.threshold,
            merge_threshold: cli.merge_threshold,
            lexicon: cli.lexicon,
            jobs: cli.jobs,
            format: cli.format,
            averaging,
        },
    )?;
    log::debug!("configuration: {cfg:?}");
    let out = match cli.command {
        Command::BuildGraph { input, out } => {
            let text = commands::build_graph(&input, &cfg)?;
            return emit(out.as_deref(), &text);
        }
        Command::Answer { manual, question } => commands::answer(&manual, &question, &cfg)?,
        Command::Eval { corpus, system, out, .. } => {
            let text = commands::eval(&corpus, system, &cfg)?;
            return emit(out.as_deref(), &text);
        }
        Command::Inspect {
            graph,
            question,
            ids,
            index,
        } => commands::inspect(&graph, question, &ids, index, &cfg)?,
    };
    emit(None, &out)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
