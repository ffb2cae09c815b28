//! `fractrunc`: constants, critical exponents and verification suites for the
//! fractional truncated Laplacians on the half-space.
//!
//! Exit codes: 0 success or pass, 1 verification failure or computation error,
//! 2 usage or domain error, 3 inconclusive verification.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fractrunc::constants::ConstantsError;
use fractrunc::operators::OperatorError;
use fractrunc::profiles::{ProfileError, PsiKind, SingularOp};
use fractrunc::verify::VerifyError;

use config::ConfigArgs;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ConstantsError> for CliError {
    fn from(e: ConstantsError) -> Self {
        match e {
            ConstantsError::Domain { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Domain { .. } | ProfileError::ExponentOutOfRange { .. } => CliError::Usage(e.to_string()),
            ProfileError::Constants(c) => c.into(),
            ProfileError::InvariantViolation { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::NotOrthonormal(_) | OperatorError::Section(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Domain(_) | VerifyError::GeometryViolation(_) | VerifyError::NotFound { .. } => {
                CliError::Usage(e.to_string())
            }
            VerifyError::Operator(o) => o.into(),
            VerifyError::Profile(p) => p.into(),
            VerifyError::Constants(c) => c.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fractrunc", version, about = "Fractional truncated Laplacians on the half-space")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Special constants with error estimates, as JSON.
    Constants(ConstantsArgs),
    /// One of the critical exponents.
    Roots(RootsArgs),
    /// Critical exponent table for given N and s.
    Table(TableArgs),
    /// Extremal operator of the radial power w_gamma at a point.
    Eval(EvalArgs),
    /// Runs a verification suite and writes its report.
    Verify(VerifyArgs),
    /// Recomputes roots or exponent bounds over a grid of s.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub s: f64,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    GammaBar,
    GammaTilde,
    GammaPlus,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub s: f64,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub s: f64,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub k: usize,
    /// Point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    #[arg(long, value_enum)]
    pub variant: Variant,
    /// Also run the frame search.
    #[arg(long)]
    pub search: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Report path.
    #[arg(long, global = true, default_value = "report.json")]
    pub report: String,
    #[command(subcommand)]
    pub construction: Construction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsiKindArg {
    Decay,
    Halfint,
    Growth,
}

impl From<PsiKindArg> for PsiKind {
    fn from(k: PsiKindArg) -> Self {
        match k {
            PsiKindArg::Decay => PsiKind::Decay,
            PsiKindArg::Halfint => PsiKind::Halfint,
            PsiKindArg::Growth => PsiKind::Growth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    IkMinus,
    InPlus,
}

impl From<OpArg> for SingularOp {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::IkMinus => SingularOp::IkMinus,
            OpArg::InPlus => SingularOp::InPlus,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Construction {
    /// Bump train for I_k^-, k < N.
    BumpTrain {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        /// Bump half-width, or `auto`.
        #[arg(long, default_value = "auto")]
        eps: String,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
    },
    /// Frame bound of the half-space power tail for I_N^-.
    #[command(name = "t49-2")]
    T49_2 {
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long)]
        s: f64,
        /// Tail exponent, or `auto` for 2s/(p-1).
        #[arg(long, default_value = "auto")]
        gamma: String,
        /// Exponent used by `--gamma auto`; defaults to 0.2 above the critical one.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Subsolution bound of psi; reports the empirical R0.
    Psi {
        #[arg(long, value_enum, default_value = "decay")]
        kind: PsiKindArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: f64,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.5)]
        r_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        r_max: f64,
    },
    /// Singular power supersolution for p < -1.
    Singular {
        #[arg(long)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, value_enum, default_value = "ik-minus")]
        op: OpArg,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        /// Random frames per point for `in-plus`.
        #[arg(long, default_value_t = 100)]
        frames: usize,
    },
    /// Directional operator of (x_N)_+^mu against its closed form.
    Power {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        s: f64,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        /// Direction, comma separated; defaults to e_N.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
    },
    /// Power transform of the singular p-family into the q-family.
    Transform {
        #[arg(long)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
    },
    /// Ball below the wall, unseen along the balanced frame.
    Avoidance {
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Ball centre, comma separated; defaults to (0,…,0,-1.5 r).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Targets {
    Roots,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    S,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "s")]
    pub param: SweepParam,
    #[arg(long, default_value_t = 0.1)]
    pub from: f64,
    #[arg(long, default_value_t = 0.9)]
    pub to: f64,
    #[arg(long, default_value_t = 9)]
    pub steps: usize,
    /// Explicit grid, comma separated; overrides from/to/steps.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long, value_enum, default_value = "roots")]
    pub targets: Targets,
    #[arg(long = "N", default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: String,
    /// Base name of the emitted files.
    #[arg(long, default_value = "sweep")]
    pub name: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::Config::resolve(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let result = match cli.command {
        Command::Constants(a) => commands::constants(&cfg, &a),
        Command::Roots(a) => commands::roots(&cfg, &a),
        Command::Table(a) => commands::table(&cfg, &a),
        Command::Eval(a) => commands::eval(&cfg, &a),
        Command::Verify(a) => commands::verify(&cfg, &a),
        Command::Sweep(a) => commands::sweep(&cfg, &a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {}", e.message());
    ExitCode::from(e.exit_code())
}
