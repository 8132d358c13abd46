//! `combcnn`: dataset generation, tensor inspection, equivalence checks,
//! training, evaluation and gradient self-tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 invariant violation, 3 I/O or
//! file-format error. Every failure prints one line `error[<kind>]: <reason>`
//! on stderr.

mod commands;
mod format;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use combcnn_core::Error;

#[derive(Debug, Parser)]
#[command(name = "combcnn", version, about = "Combinatorial word invariants and CNN classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate train/val/test splits as `<label>\t<word>` files.
    Gen(GenArgs),
    /// Print the combinatorics of one word as sparse triples or a dense tensor.
    Tensor(TensorArgs),
    /// Compare map equality with the existence of a letter bijection.
    Equiv(EquivArgs),
    /// Train a classifier and write a checkpoint, metrics and a manifest.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset file.
    Eval(EvalArgs),
    /// Finite-difference check of every layer's gradients.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenTask {
    Palindromes,
    Passwords,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub task: GenTask,
    /// Word length.
    #[arg(long = "len")]
    pub len: usize,
    /// Items per class in the training split.
    #[arg(long)]
    pub train: usize,
    /// Items per class in the validation split.
    #[arg(long)]
    pub val: usize,
    /// Items per class in the test split.
    #[arg(long)]
    pub test: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TensorFormat {
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    None,
    Log,
}

#[derive(Debug, Args)]
pub struct TensorArgs {
    #[arg(long)]
    pub word: String,
    #[arg(long, value_enum)]
    pub format: TensorFormat,
    /// Keep only ν channels of subword length <= K (dense only).
    #[arg(long = "nu-cap", value_name = "K")]
    pub nu_cap: Option<usize>,
    /// Value normalization (dense only) [default: log].
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Use the brute-force map and exhaustive bijection search.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Palindrome,
    Password,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Combinatorial,
    Char,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Directory holding train.tsv and val.tsv (test.tsv is optional).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 48)]
    pub epochs: usize,
    /// Seeds both initialization and batch order.
    #[arg(long)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "combinatorial")]
    pub model: ModelArg,
    #[arg(long = "batch-size", default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long = "steps-per-epoch", default_value_t = 30)]
    pub steps_per_epoch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    /// Momentum for `--optimizer sgd`.
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    /// ν-length cap for the combinatorial input; defaults to 3 for words
    /// longer than 12 and to no cap otherwise.
    #[arg(long = "nu-cap", value_name = "K")]
    pub nu_cap: Option<usize>,
    /// Disable the ν-length cap.
    #[arg(long = "no-nu-cap", conflicts_with = "nu_cap")]
    pub no_nu_cap: bool,
    #[arg(long, value_enum, default_value = "log")]
    pub norm: NormArg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// A `<label>\t<word>` dataset file.
    #[arg(long)]
    pub data: PathBuf,
    /// Relabel the data with a random alphabet permutation first.
    #[arg(long = "permute-seed")]
    pub permute_seed: Option<u64>,
    /// Manifest path; defaults to eval-manifest.json beside the checkpoint.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random configurations per layer kind.
    #[arg(long, default_value_t = 20)]
    pub configs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Invariant,
    Io,
}

impl ErrorKind {
    fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Invariant => 2,
            ErrorKind::Io => 3,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Invariant => "invariant",
            ErrorKind::Io => "io",
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Usage, message: message.into() }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Invariant, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { kind: ErrorKind::Io, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Io { .. } | Error::Parse { .. } | Error::Checkpoint(_) | Error::TruncatedBlob { .. } => {
                ErrorKind::Io
            }
            Error::Diverged { .. } => ErrorKind::Invariant,
            _ => ErrorKind::Usage,
        };
        CliError { kind, message: e.to_string() }
    }
}

fn fail(e: &CliError) -> ExitCode {
    // the reason stays on one line so callers can parse it
    eprintln!("error[{}]: {}", e.kind, e.message.replace('\n', " "));
    ExitCode::from(e.kind.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let reason = match e.kind() {
                K::DisplayHelpOnMissingArgumentOrSubcommand => "missing subcommand or argument",
                _ => rendered.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "),
            };
            eprintln!("error[usage]: {reason}");
            eprint!("{rendered}");
            return ExitCode::from(ErrorKind::Usage.exit_code());
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Tensor(a) => commands::tensor(&a),
        Command::Equiv(a) => commands::equiv(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Gradcheck(a) => commands::gradcheck(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
