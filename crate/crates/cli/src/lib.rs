//! `coa` command-line front end.
//!
//! Every output file is written atomically and accompanied by a
//! `<output>.run.json` sidecar describing the run. Exit codes: 0 success,
//! 1 usage error, 2 data or validation error, 3 internal error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Usage,
    Data,
    Internal,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Usage => 1,
            ExitStatus::Data => 2,
            ExitStatus::Internal => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coa", version, about = "Counterfactual augmentation and co-occurrence analysis for report corpora")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Label schema file (default: the built-in 14-label schema, d = 16).
    #[arg(long, global = true, env = "COA_SCHEMA")]
    pub schema: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Args, Clone)]
pub struct LexiconArgs {
    /// Lexicon file (`disease<TAB>pattern`); `default` uses the built-in one.
    #[arg(long, default_value = "default")]
    pub lexicon: String,
    /// Cue file (`window=N`, `neg<TAB>phrase`, `unc<TAB>phrase`).
    #[arg(long, default_value = "default")]
    pub cues: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label a corpus (or raw text, one report per line) with the rule labeler.
    Label {
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        corpus: Option<PathBuf>,
        /// Raw text input: one report per line, segmented into sentences.
        #[arg(long)]
        text: Option<PathBuf>,
        #[command(flatten)]
        lexicon: LexiconArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Co-occurrence analysis of disease pairs.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// Pair to analyse as `A,B` (disease names); repeatable. Default: all pairs.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// `none`, `provenance`, or `disease:<name>`.
        #[arg(long, default_value = "none")]
        stratify: String,
        /// Re-label even when the corpus already carries labels.
        #[arg(long)]
        relabel: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Append counterfactual records (CSS then CRR).
    Augment {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArgs,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        no_css: bool,
        #[arg(long)]
        no_crr: bool,
        #[arg(long, default_value_t = 5)]
        max_resample: usize,
        #[arg(long, default_value_t = 2)]
        min_sentences: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth {
        /// Scenario file, or `default` for the built-in scenario.
        #[arg(long, default_value = "default")]
        scenario: String,
        /// Number of records (default: the scenario's n_records).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated reports against gold reports.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        generated: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// Comma-separated subset of `ce,bleu4,rougel`.
        #[arg(long, default_value = "ce,bleu4,rougel")]
        metrics: String,
        /// Also report macro-averaged CE scores.
        #[arg(long)]
        macro_ce: bool,
        /// Binarize Uncertain as positive for CE.
        #[arg(long)]
        uncertain_positive: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// synth, label, analyze, augment at rate 1.0, analyze again.
    Pipeline {
        #[arg(long, default_value = "default")]
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// Directory for original.jsonl, augmented.jsonl, summary.json, summary.txt.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitStatus::Success,
                _ => ExitStatus::Usage,
            };
        }
    };
    let started = Instant::now();
    match with_pool(cli.global.threads, || commands::dispatch(&cli, started)) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("coa: {e}");
            e.status()
        }
    }
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: Option<u64>, f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n as usize);
    }
    let pool = b.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: Option<u64>, f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    f()
}
