//! `objcalc`: parse, type check, run, fuzz and falsify object-calculus programs.
//!
//! Exit codes: 0 success, 1 negative verdict (ill-typed, stuck, failing
//! fuzz run, counterexample), 2 resource verdict (fuel or budget), 3 usage
//! or input error.

mod config;
mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "objcalc", version, about = "Imperative object calculus toolkit")]
pub struct Cli {
    /// Emit one JSON object per line instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Optional `key = value` settings file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for fuzz and lemma runs (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a program and print it back.
    Parse(ParseArgs),
    /// Type check a program.
    Check(CheckArgs),
    /// Evaluate a program.
    Eval(EvalArgs),
    /// Generate well-typed programs and run them.
    Fuzz(FuzzArgs),
    /// Search for counterexamples to semantic typing lemmas.
    Lemma(LemmaArgs),
    /// Rewrite variance annotations into split object types.
    Encode(TransformArgs),
    /// Expand self types into recursive existentials.
    Desugar(TransformArgs),
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    /// Program file, or `-` for standard input.
    pub file: Option<PathBuf>,
    /// Parse the input as a type instead of a term.
    #[arg(long = "type", value_name = "TYPE", conflicts_with = "file")]
    pub ty: Option<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    /// `variance` or `split` (default variance).
    #[arg(long)]
    pub mode: Option<String>,
    /// Check against this type instead of synthesizing one.
    #[arg(long = "type", value_name = "TYPE")]
    pub ty: Option<String>,
    /// Subtyping fuel (default 10000).
    #[arg(long)]
    pub fuel: Option<u64>,
    /// Print the chain of failing premises.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub file: PathBuf,
    /// Maximal number of reduction steps (default 500).
    #[arg(long)]
    pub fuel: Option<usize>,
    /// Print every configuration of the run.
    #[arg(long)]
    pub trace: bool,
    /// `canonical` or `random:SEED` (default canonical).
    #[arg(long)]
    pub alloc: Option<String>,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Number of programs (default 1000).
    #[arg(long)]
    pub n: Option<u64>,
    /// Steps per program (default 500).
    #[arg(long)]
    pub fuel: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximal term depth (default 6).
    #[arg(long)]
    pub depth: Option<usize>,
    /// `variance` or `split` (default variance).
    #[arg(long)]
    pub mode: Option<String>,
    /// Break one typing rule in the generator's checker.
    #[arg(long, value_name = "NAME")]
    pub mutate: Option<String>,
    /// Also write the full report to this file as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LemmaArgs {
    /// Lemma name, or `all` for the stock suite (default all).
    #[arg(long)]
    pub lemma: Option<String>,
    /// Maximal step index (default 5).
    #[arg(long)]
    pub budget: Option<u32>,
    /// Sampling seed (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run a broken variant; without a name, every variant.
    #[arg(long, value_name = "NAME", num_args = 0..=1, default_missing_value = "all", require_equals = true)]
    pub mutate: Option<String>,
    /// List lemma and mutation names.
    #[arg(long)]
    pub list: bool,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Program file, or `-` for standard input.
    pub file: Option<PathBuf>,
    /// Transform this type instead of a program.
    #[arg(long = "type", value_name = "TYPE", conflicts_with = "file")]
    pub ty: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { run::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run::main(cli))
}
