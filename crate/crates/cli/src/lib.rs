//! The `semistream` command line. Every command prints one JSON
//! [`RunReport`] on stdout and a short summary on stderr.
//!
//! Exit codes: 0 on success (including uncertified results), 1 when an
//! algorithm fails, 2 for unreadable input or bad flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use semistream::error::Error;
use semistream::ipm::Profile;

mod commands;
mod report;
mod selftest;

pub use report::{digest_files, RunReport};

#[derive(Debug, Parser)]
#[command(
    name = "semistream",
    version,
    about = "Pass-counted matching, vertex cover and SDD solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `rigorous` (short steps, full precision) or `fast` (long steps,
    /// results certified after the fact).
    #[arg(long, global = true, default_value = "rigorous")]
    pub profile: Profile,
    /// Solve tolerance for `solve-sdd`, centrality bound for the IPM
    /// commands.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Sparsifier quality.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Write the per-iteration IPM trace to this CSV file.
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
    /// Machine output only: no summary on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertex count, edge count and largest weight, in one pass.
    Stats { graph: PathBuf },
    /// Exact maximum-weight matching.
    SolveMatching {
        graph: PathBuf,
        /// Weight scale exponent; defaults to the smallest valid one.
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        max_trials: Option<usize>,
        /// Run this many trials at a time on separate threads.
        #[arg(long, default_value_t = 1)]
        trials_parallel: usize,
    },
    /// Minimum vertex cover, or minimum integral cover of edge demands.
    SolveVertexCover {
        graph: PathBuf,
        /// Lines `<u> <v> <demand>`; unit demands if omitted.
        demands: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        attempts: usize,
    },
    /// Solve `A x = b` for symmetric diagonally dominant `A`.
    SolveSdd { matrix: PathBuf, rhs: PathBuf },
    /// One-pass spectral sparsifier of a graph or SDDM matrix.
    Sparsify {
        input: PathBuf,
        /// Also write the sparsified matrix in MatrixMarket format.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Quick end-to-end checks against the reference solvers.
    Selftest,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Algorithm(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Algorithm(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Parse { .. }
            | Error::Io(_)
            | Error::StreamIntegrity(_)
            | Error::Parameter(_)
            | Error::IndexOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Algorithm(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// What a command hands back for the report.
pub struct Outcome {
    pub input_digest: Option<String>,
    pub passes: u64,
    pub peak_words: u64,
    pub certified: Option<bool>,
    pub result: serde_json::Value,
    pub summary: String,
    /// Exit 1 even though a report was produced.
    pub failed: bool,
}

pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let (name, uses_seed, uses_profile) = match &cli.command {
        Command::Stats { .. } => ("stats", false, false),
        Command::SolveMatching { .. } => ("solve-matching", true, true),
        Command::SolveVertexCover { .. } => ("solve-vertex-cover", true, true),
        Command::SolveSdd { .. } => ("solve-sdd", true, true),
        Command::Sparsify { .. } => ("sparsify", true, false),
        Command::Selftest => ("selftest", true, false),
    };
    let res = match &cli.command {
        Command::Stats { graph } => commands::stats(graph),
        Command::SolveMatching {
            graph,
            alpha,
            max_trials,
            trials_parallel,
        } => commands::solve_matching(graph, *alpha, *max_trials, *trials_parallel, &cli.common),
        Command::SolveVertexCover {
            graph,
            demands,
            attempts,
        } => commands::solve_vertex_cover(graph, demands.as_deref(), *attempts, &cli.common),
        Command::SolveSdd { matrix, rhs } => commands::solve_sdd(matrix, rhs, &cli.common),
        Command::Sparsify { input, output } => {
            commands::sparsify(input, output.as_deref(), &cli.common)
        }
        Command::Selftest => selftest::run(cli.common.seed),
    };
    let o = match res {
        Ok(o) => o,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Algorithm(msg)) = &e;
            let _ = writeln!(err, "semistream {name}: {msg}");
            return e.code();
        }
    };
    let report = RunReport {
        command: name.to_string(),
        input_digest: o.input_digest,
        seed: uses_seed.then_some(cli.common.seed),
        profile: uses_profile.then(|| {
            match cli.common.profile {
                Profile::Rigorous => "rigorous",
                Profile::Fast => "fast",
            }
            .to_string()
        }),
        passes: o.passes,
        peak_words: o.peak_words,
        wall_time: cli.common.timing.then(|| start.elapsed().as_secs_f64()),
        certified: o.certified,
        result: o.result,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if writeln!(out, "{json}").is_err() {
        return 1;
    }
    if !cli.common.json {
        let _ = writeln!(err, "{}", o.summary);
    }
    if o.failed {
        1
    } else {
        0
    }
}
