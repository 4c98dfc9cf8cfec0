mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use report::{write_json, Failure};

/// Weighted shifts on directed forests: exact hyponormality and
/// subnormality certificates, extensions and counterexamples.
///
/// Exit codes: 0 the property holds, 3 it fails, 2 structural error,
/// 4 infeasible input, 1 internal error.
#[derive(Parser, Debug)]
#[command(name = "shiftlab", version)]
pub struct Cli {
    /// Arithmetic for hip checks.
    #[arg(long, global = true, value_enum, env = "SHIFTLAB_MODE", default_value = "exact")]
    pub mode: Mode,
    /// Slack for `hip <= 1` in float mode.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Seed for generated inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the resulting forest or shift (or the report) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Hyponormal,
    PowerHyponormal,
    Subnormal,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Forest operations.
    #[command(subcommand)]
    Forest(ForestCmd),
    /// Decide a property of a shift.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        /// Power checked by `hyponormal`.
        #[arg(short, default_value_t = 1)]
        k: usize,
        /// Largest power checked by `power-hyponormal`.
        #[arg(long, default_value_t = 2)]
        kmax: usize,
        shift: PathBuf,
    },
    /// Backward and joint extensions of subnormal shifts.
    #[command(subcommand)]
    Extend(ExtendCmd),
    /// Hyponormal shift whose square is not hyponormal.
    #[command(group(ArgGroup::new("source").required(true).args(["tree", "generate"])))]
    Counterexample {
        /// Tree JSON.
        tree: Option<PathBuf>,
        /// Use a random non-forkless tree with at most this many vertices.
        #[arg(long)]
        generate: Option<usize>,
        /// Fork vertex to build on.
        #[arg(long)]
        v1: Option<String>,
    },
    /// Phases turning complex weights into their moduli.
    Gauge { input: PathBuf },
    /// Hankel test of a moment prefix, or moments and backward extension of
    /// a measure.
    Moments {
        input: PathBuf,
        /// Backward steps for a measure input.
        #[arg(short, default_value_t = 0)]
        k: usize,
        /// Number of moments listed for a measure input.
        #[arg(short, default_value_t = 8)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ForestCmd {
    Validate {
        forest: PathBuf,
    },
    Power {
        #[arg(short)]
        k: usize,
        forest: PathBuf,
    },
    RootedSum {
        #[arg(long, default_value = "w")]
        root: String,
        #[arg(required = true)]
        trees: Vec<PathBuf>,
    },
    Backward {
        #[arg(short)]
        k: usize,
        tree: PathBuf,
    },
    Classify {
        forest: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExtendCmd {
    /// k-step backward extension of a subnormal shift on a rooted tree.
    Single {
        #[arg(short)]
        k: usize,
        /// Scale `C`, at most `1 / C_0`; defaults to the maximum.
        #[arg(long)]
        scale: Option<String>,
        shift: PathBuf,
    },
    /// Join a family under a new root keeping a k-step extension.
    RootedSum {
        #[arg(short)]
        k: usize,
        #[arg(long, default_value = "w")]
        root: String,
        #[arg(required = true)]
        shifts: Vec<PathBuf>,
    },
    /// Join a family along an envelope tree of depth `--depth`.
    JoinDepth {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        envelope: PathBuf,
        #[arg(required = true)]
        shifts: Vec<PathBuf>,
    },
    /// Join members whose 1-step extensions are power hyponormal.
    Powerhypo {
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value = "w")]
        root: String,
        /// Squared weight above each member root, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sq: Vec<String>,
        #[arg(required = true)]
        shifts: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let body = Failure::Usage(e.kind().to_string()).to_json();
            eprint!("{e}");
            println!("{}", serde_json::to_string_pretty(&body).expect("values serialize"));
            return ExitCode::from(report::STRUCTURAL);
        }
    };
    let outcome = commands::run(&cli).and_then(|o| {
        if let Some(path) = &cli.out {
            write_json(path, o.artifact.as_ref().unwrap_or(&o.report))?;
        }
        Ok(o)
    });
    let (code, body) = match outcome {
        Ok(o) => (o.code, o.report),
        Err(f) => (f.code(), f.to_json()),
    };
    println!("{}", serde_json::to_string_pretty(&body).expect("values serialize"));
    ExitCode::from(code)
}

impl Cli {
    fn tolerance(&self) -> Result<f64, Failure> {
        if self.mode == Mode::Float && (self.tolerance.is_nan() || self.tolerance <= 0.0) {
            return Err(Failure::Usage("tolerance must be positive in float mode".into()));
        }
        Ok(self.tolerance)
    }
}
