//! `cocart`: check, construct, fibre and verify from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Dsl(#[from] cocart::dsl::DslError),
    #[error(transparent)]
    Suite(#[from] cocart::suites::SuiteError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("no {what} named `{name}`")]
    Missing { what: &'static str, name: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

#[derive(Parser, Debug)]
#[command(name = "cocart", version, about = "Finite categories, presentations and cocartesian fibrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for relative paths and `cocart.toml` [env: COCART_WORKSPACE]
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    /// Settings file; defaults to `cocart.toml` in the workspace directory
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for generated and seeded instances (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Longest word the rewriting engine examines
    #[arg(long, global = true)]
    pub max_word_len: Option<usize>,
    /// Stages of a tower or sequential colimit
    #[arg(long, global = true)]
    pub max_stages: Option<usize>,
    /// Iterations of S
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    /// Emit JSON
    #[arg(long, global = true, conflicts_with = "dot")]
    pub json: bool,
    /// Emit DOT
    #[arg(long, global = true)]
    pub dot: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a workspace file, resolve references and validate every entity
    Check { file: PathBuf },
    /// Build a category from declared ones
    #[command(subcommand)]
    Construct(Construct),
    /// Cocartesian fibrations
    #[command(subcommand)]
    Fib(Fib),
    /// Run a conformance suite by name or number, `all`, or a suite block of `--file`
    Verify {
        suite: String,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// List the conformance suites
    Suites,
    /// Print a seeded instance
    Generate {
        #[arg(value_enum)]
        kind: KindArg,
        /// Objects of a category, or length of the base chain of an opfibration
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum Construct {
    /// Comma category `F / G` of a cospan
    Comma { file: PathBuf, f: String, g: String },
    /// Cocomma category of a span
    Cocomma { file: PathBuf, f: String, g: String },
    /// Pushout of a span
    Pushout { file: PathBuf, f: String, g: String },
    /// Localisation of a category at the named arrows
    Localize { file: PathBuf, category: String, arrows: Vec<String> },
    /// Join tower of `f` starting from `g0`
    Join { file: PathBuf, f: String, g0: String },
    /// Univalent completion of the fibration `p` starting from `q0`
    Complete { file: PathBuf, p: String, q0: String },
}

#[derive(Subcommand, Debug)]
pub enum Fib {
    /// Check that a functor is a cocartesian fibration and list its marked arrows
    Mark { file: PathBuf, functor: String },
    /// Fibres `B@x` and transports `B@f` of a fibration over `B`
    Straighten { file: PathBuf, fibration: String },
    /// Fibration of the strict diagram given by categories `B@x` and functors `B@f`
    Unstraighten { file: PathBuf, base: String },
    /// Localise a fibration at the named base arrows
    Localize { file: PathBuf, fibration: String, arrows: Vec<String> },
    /// Conduche test for a functor
    Conduche { file: PathBuf, functor: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Fincat,
    Opfibration,
    LocalisationInstance,
}

impl Cli {
    fn flags(&self) -> Config {
        Config {
            workspace: self.workspace.clone(),
            seed: self.seed,
            max_word_len: self.max_word_len,
            max_stages: self.max_stages,
            max_iterations: self.max_iterations,
            json: self.json.then_some(true),
            dot: self.dot.then_some(true),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::var_os(config::WORKSPACE_ENV).map(PathBuf::from);
    let result = config::settle(cli.flags(), cli.config.as_deref(), env).and_then(|cfg| commands::run(&cli.command, &cfg));
    match result {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
