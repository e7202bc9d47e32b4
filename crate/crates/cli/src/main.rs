mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "coalsim", version, about = "Bisimulation, simulation and temporal logic over finite coalgebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Enumeration limit for witness searches and exhaustive checks.
    #[arg(long, default_value_t = coalsim::DEFAULT_GUARD)]
    guard: u128,
}

#[derive(Args, Debug, Clone)]
pub struct Pair {
    /// Source coalgebra.
    #[arg(long, default_value = "c")]
    from: String,
    /// Target coalgebra.
    #[arg(long, default_value = "d")]
    to: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Direct,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Preorder,
    DownClosed,
    UpClosed,
    DownNatural,
    UpNatural,
    Naturality,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a relation is a bisimulation.
    CheckBisim {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        relation: String,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether a relation is a simulation for an order.
    CheckSim {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        relation: String,
        #[arg(long)]
        order: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the largest bisimulation between two coalgebras.
    LargestBisim {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        pair: Pair,
        /// Report whether this pair of states is related (exit 1 if not).
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        state: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the largest simulation for an order.
    LargestSim {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        order: String,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        state: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a formula: a name from the file or the text syntax, e.g.
    /// "X P", "G (P | Q)", "P U @p", "F inv(P, R)".
    Eval {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        formula: String,
        /// Coalgebra to evaluate on; may be omitted when the file has one.
        #[arg(long)]
        coalgebra: Option<String>,
        /// Natural transformation interpreting atomic propositions; defaults to
        /// the only one declared, if any.
        #[arg(long)]
        nu: Option<String>,
        /// Translate the formula along this relation first.
        #[arg(long)]
        image_of: Option<String>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Inverse, requires = "image_of")]
        direction: DirectionArg,
        /// Decide satisfaction at one state (exit 1 if it fails).
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a property of an order or natural transformation.
    CheckOrder {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long, required_unless_present = "nu")]
        order: Option<String>,
        #[arg(long)]
        nu: Option<String>,
        /// Coalgebra whose state space is the carrier; all coalgebras when omitted.
        #[arg(long)]
        coalgebra: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run randomized theorem suites.
    VerifyTheorems {
        /// `all` or a suite name.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        formula_depth: usize,
        /// Connectives every generated formula must use, e.g. `not,until`.
        #[arg(long, value_delimiter = ',')]
        require: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce the two counterexamples.
    Counterexamples {
        #[command(flatten)]
        common: Common,
    },
    /// Re-run violations from a JSON report (exit 1 if any reproduces).
    Replay {
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
