use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod params;

#[derive(Parser)]
#[command(name = "rpmargin", version, about = "Margin preservation under random projection")]
struct Cli {
    /// JSON file supplying values for flags not given on the command line
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Read input from this file instead of standard input
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form bound
    Bound(BoundArgs),
    /// Generate a synthetic dataset or vector pair
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Project a dataset (CSV on input) with a random matrix
    Project(ProjectArgs),
    /// Margin of a dataset (CSV on input) for a witness, or its maximum
    Margin(MarginArgs),
    /// Monte Carlo rejection curves and checks
    Mc {
        #[command(subcommand)]
        what: McCommand,
    },
    /// Reproduce an experiment as CSV
    Repro(ReproArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Tail,
    Chi2,
    AngleInterval,
    MinDimBinary,
    MinDimMulticlass,
    MinDimOneparam,
    MarginBinary,
    MarginMulticlass,
    MarginOneparam,
    Balcan,
}

#[derive(Args)]
struct BoundArgs {
    kind: BoundKind,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Number of data points
    #[arg(long)]
    m: Option<u64>,
    /// Number of classes
    #[arg(long = "L")]
    classes: Option<u64>,
    /// Projection dimension
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Constant of the error-allowed bound
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Four-point square stretched horizontally by s
    Square {
        #[arg(long)]
        stretch: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Unit vectors w, x with a prescribed cosine
    Pair {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        cosine: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Classes on parallel hyperplanes with a known witness
    Hyperplanes {
        #[arg(long = "L")]
        classes: Option<u64>,
        #[arg(long)]
        per_class: Option<u64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long)]
        spread: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the two-class data as a binary dataset
        #[arg(long)]
        binary: bool,
        /// Emit dataset, witness and target margin as JSON
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ProjectArgs {
    /// Target dimension
    #[arg(long)]
    n: Option<u64>,
    /// Expected input dimension
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    family: Option<String>,
    /// Number of classes for multiclass labels
    #[arg(long = "L")]
    classes: Option<u64>,
}

#[derive(Args)]
struct KindFlags {
    #[arg(long, conflicts_with = "unnormalised")]
    normalised: bool,
    #[arg(long)]
    unnormalised: bool,
}

#[derive(Args)]
struct MarginArgs {
    /// Comma-separated witness; repeat once per class for multiclass data
    #[arg(long, allow_hyphen_values = true)]
    witness: Vec<String>,
    #[command(flatten)]
    kind: KindFlags,
    /// Treat the witnesses as blocks of one concatenated parameter
    #[arg(long)]
    one_param: bool,
    /// Compute the maximum normalised binary margin instead
    #[arg(long)]
    optimize: bool,
    #[arg(long = "L")]
    classes: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct McArgs {
    /// Grid of target dimensions: a:b:step or a comma list
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct McMarginArgs {
    #[command(flatten)]
    common: McArgs,
    #[arg(long, allow_hyphen_values = true)]
    witness: Vec<String>,
    #[command(flatten)]
    kind: KindFlags,
    #[arg(long)]
    one_param: bool,
    /// Re-optimise the projected binary margin instead of projecting the witness
    #[arg(long)]
    reoptimize: bool,
    /// JSON from `gen hyperplanes --json` supplying dataset and witness
    #[arg(long)]
    generated: Option<PathBuf>,
    #[arg(long = "L")]
    classes: Option<u64>,
}

#[derive(Args)]
struct McMeanArgs {
    /// Target dimension
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    family: Option<String>,
}

#[derive(Subcommand)]
enum McCommand {
    /// Cosine-ratio rejection for a pair (CSV on input)
    Angle(McArgs),
    /// Inner-product-ratio rejection for a pair
    Inner(McArgs),
    /// Margin-ratio rejection for a dataset and witness
    Margin(McMarginArgs),
    /// Squared-norm distortion frequency against its tail bound
    Norm(McArgs),
    /// Projected cosine leaving its guaranteed interval
    Eq4(McArgs),
    /// Sample mean and standard error of the projected inner product
    Mean(McMeanArgs),
}

#[derive(Args)]
struct ReproArgs {
    /// fig2a, fig2b, fig2c, fig2d, fig3 or counterexample
    figure: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials (Monte Carlo samples for counterexample)
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    family: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<rpmargin::Error> for CliError {
    fn from(e: rpmargin::Error) -> Self {
        match e {
            rpmargin::Error::Degenerate(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", p.display())))
        }
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Runtime(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write output: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let spec = match &cli.spec {
        Some(p) => params::Spec::load(p)?,
        None => params::Spec::empty(),
    };
    let input = || read_input(&cli.input);
    let text = match cli.command {
        Command::Bound(a) => commands::bound(&a, &spec)?,
        Command::Gen { what } => commands::gen(&what, &spec)?,
        Command::Project(a) => commands::project(&a, &spec, &input()?)?,
        Command::Margin(a) => commands::margin(&a, &spec, &input()?)?,
        Command::Mc { what } => commands::mc(&what, &spec, input)?,
        Command::Repro(a) => commands::repro(&a, &spec)?,
    };
    write_output(&cli.out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
