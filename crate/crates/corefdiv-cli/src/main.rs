//! corefdiv: lexical diversity analytics, head-lemma baseline, and
//! coreference scoring for CDCR corpora.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;
mod output;

use commands::*;

#[derive(Parser)]
#[command(
    name = "corefdiv",
    version,
    about = "Quantify lexical diversity of coreference chains, run the \
             same-head-lemma baseline, and score clusterings with \
             MUC/B3/CEAF-e/CoNLL-F1",
    after_help = "Set COREFDIV_THREADS to cap the worker pool."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus, check every structural invariant, and report findings.
    Validate(ValidateArgs),
    /// Convert between the canonical JSON and CoNLL column formats.
    Convert(ConvertArgs),
    /// Dataset summary: counts, average chain size, unique lemmas, PD.
    Stats(StatsArgs),
    /// Per-chain diversity figures as CSV plus an optional summary JSON.
    Diversity(DiversityArgs),
    /// Cluster gold mentions by head lemma and score against the gold chains.
    Baseline(BaselineArgs),
    /// Score a CoNLL response file against a CoNLL key file.
    Score(ScoreArgs),
    /// Widen mentions to maximal NP/VP constituents from bracketed parses.
    Expand(ExpandArgs),
    /// Per-chain (size, unique lemmas, PD) rows for external plotting.
    Plotdata(PlotdataArgs),
    /// Full report bundle: validate, optional expansion, diversity,
    /// baseline, scoring, and a reproducibility manifest.
    Pipeline(PipelineArgs),
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("COREFDIV_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("ignoring invalid COREFDIV_THREADS value {value:?}"),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Diversity(args) => cmd_diversity(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Score(args) => cmd_score(args),
        Command::Expand(args) => cmd_expand(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("corefdiv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
