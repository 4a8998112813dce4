mod commands;
mod config;
mod plot;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Morse-block constructions in the one-sided 2-shift: generation,
/// distribution-function estimates, tuple classification and exact checks.
#[derive(Parser, Debug)]
#[command(name = "scrambled", version)]
pub struct Cli {
    /// Worker threads for parallel sweeps (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a prefix of a point.
    Gen(GenArgs),
    /// Estimate the lower and upper distribution functions at checkpoints.
    Df(DfArgs),
    /// Classify a tuple as scrambled evidence or not.
    Classify(ClassifyArgs),
    /// Run an exact verification suite.
    Verify(VerifyArgs),
    /// Render a df CSV as a static SVG chart.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Point descriptor, e.g. `morse` or `t1 i=1 gaps=1,2`.
    pub descriptor: String,
    /// Number of symbols.
    pub length: usize,
    /// Gap list for descriptors that omit `gaps=`.
    #[arg(long)]
    pub gaps: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct TupleArgs {
    /// Point descriptor; repeat once per point.
    #[arg(long = "tuple", required = true)]
    pub tuple: Vec<String>,
    /// Gap list for descriptors that omit `gaps=`.
    #[arg(long)]
    pub gaps: Option<String>,
    /// Comma-separated horizons; `s<j>` names the block boundary `s_j`,
    /// optionally with `+c` or `-c`.
    #[arg(long, allow_hyphen_values = true)]
    pub checkpoints: Option<String>,
    /// Single horizon, used when no checkpoints are given.
    #[arg(long)]
    pub horizon: Option<String>,
    /// Truncation depth `L` in bits.
    #[arg(long, default_value_t = 32)]
    pub precision: u32,
    /// Look-ahead for deciding windows one unit below a threshold.
    #[arg(long)]
    pub resolve_limit: Option<u64>,
    #[arg(long, default_value = "auto")]
    pub engine: String,
}

#[derive(Args, Debug)]
pub struct DfArgs {
    #[command(flatten)]
    pub tuple: TupleArgs,
    /// Comma-separated dyadic thresholds such as `1/16,0.5,1-2^-3`.
    #[arg(long)]
    pub delta_grid: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub tuple: TupleArgs,
    #[arg(long)]
    pub delta_grid: Option<String>,
    /// Smallness threshold; defaults to `2^-(L-2)`.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Required limsup of min-pair distances.
    #[arg(long, default_value = "1/4")]
    pub separation: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// Overlap-freeness of a Morse prefix.
    P {
        #[arg(long, default_value_t = 1 << 14)]
        prefix: usize,
        /// Scan this word instead of the Morse prefix.
        #[arg(long)]
        word: Option<String>,
    },
    /// Shifted Morse sequence starts with the block concatenation.
    Lemma1 {
        #[arg(long)]
        gaps: String,
        /// Number of blocks; defaults to all.
        #[arg(long)]
        n: Option<usize>,
    },
    /// No aligned agreement window for shifted pairs of family points.
    Step2 {
        #[arg(long)]
        gaps: String,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        /// Window length; defaults to `14 r`.
        #[arg(long)]
        window: Option<u64>,
    },
    /// Coding difference counts for two beta words.
    Lemma2 {
        #[arg(long)]
        beta1: String,
        #[arg(long)]
        beta2: String,
        #[arg(long, default_value_t = 1024)]
        n: u64,
    },
    /// Symbolwise estimates equal exact block counts.
    OracleMatch {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        delta_grid: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// CSV produced by `df`.
    pub input: std::path::PathBuf,
    /// Only plot these thresholds (comma-separated, as written in the CSV).
    #[arg(long)]
    pub deltas: Option<String>,
    #[arg(long, default_value_t = 800)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or an unusable parameter combination (exit 2).
    Usage(String),
    /// A verification check failed (exit 1).
    Verify,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
