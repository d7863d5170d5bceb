//! `lpspace`: JSON in, JSON out.
//!
//! Every invocation writes exactly one JSON document, to `--out` or stdout.
//! Exit codes: 0 success, 1 acceptance suite failed, 2 invalid input or
//! domain error, 3 size cap exceeded, 64 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "lpspace", version, about = "Norms, block bases, step functions and ordinal indices for L^p sequence spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Args, Debug, Default)]
pub struct Opts {
    /// Exponent p
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Secondary exponent (lemma24 q)
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Norm exponent r
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// WeightSequence JSON (an array of them for `norm mixed`)
    #[arg(long, global = true, value_name = "FILE")]
    pub weights: Option<PathBuf>,
    /// Coefficients: a CoefficientTensor or a plain array
    #[arg(long, global = true, value_name = "FILE")]
    pub coeffs: Option<PathBuf>,
    /// FiniteRelation JSON
    #[arg(long, global = true, value_name = "FILE")]
    pub rel: Option<PathBuf>,
    /// CfreTree JSON
    #[arg(long, global = true, value_name = "FILE")]
    pub tree: Option<PathBuf>,
    /// Operation-specific JSON document (see README)
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials; exact enumeration when absent
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON document here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Stream diagnostics as JSON lines on stderr
    #[arg(long, global = true)]
    pub verbose: bool,

    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Squeeze factor in (0, 1]
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Dyadic level
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Number of blocks to design
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Canonical weight case: a, b, c or star
    #[arg(long, global = true)]
    pub case: Option<String>,
    #[arg(long, global = true)]
    pub len: Option<usize>,
    /// Random variable family: three_valued, rademacher, stable or custom
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Stable index T in (1, 2]
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// A single weight w in (0, 1]
    #[arg(long, global = true)]
    pub weight: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Ordinal below w^w, e.g. "w^2*3+w+1"
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true)]
    pub width: Option<u64>,
    /// 0-based coordinate id
    #[arg(long, global = true)]
    pub coord: Option<usize>,
    /// Comma-separated 0-based coordinate ids
    #[arg(long, global = true, value_delimiter = ',')]
    pub keep: Option<Vec<usize>>,
    /// Comma-separated coordinate order for the Haar ladder
    #[arg(long, global = true, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    /// Start the dual-sup ascent from random points only
    #[arg(long, global = true)]
    pub cold: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Norms of coefficient arrays
    Norm {
        #[command(subcommand)]
        op: NormOp,
    },
    /// Weight-sequence classification and canonical witnesses
    Classify {
        #[command(subcommand)]
        op: Option<ClassifyOp>,
    },
    /// Block bases and projections
    Blocks {
        #[command(subcommand)]
        op: BlocksOp,
    },
    /// Unit-ball suprema: closed form against numerical ascent
    Dualsup,
    /// Sums of independent random variables
    Rosenthal {
        #[command(subcommand)]
        op: Option<RosenthalOp>,
    },
    /// Rademacher sums
    Khintchine {
        #[command(subcommand)]
        op: Option<KhintchineOp>,
    },
    /// Step functions on product probability spaces
    Stepfn {
        #[command(subcommand)]
        op: StepOp,
    },
    /// Dyadic trees, relations and ordinal indices
    Tree {
        #[command(subcommand)]
        op: TreeOp,
    },
    /// Acceptance suite
    Suite {
        #[command(subcommand)]
        op: SuiteOp,
    },
}

#[derive(Subcommand, Debug)]
pub enum NormOp {
    /// max(|x|_p, |wx|_2) for --weights and --coeffs
    Xpw,
    /// weighted l2 inner product of --coeffs and --input
    Inner,
    /// tensor norm of a rank-n --coeffs tensor
    Tensor,
    /// B_p norm; --coeffs holds [{"n", "coeffs"}]
    Bp,
    /// mixed norm over --weights (array) and ragged --coeffs
    Mixed,
    /// conjugate exponent of --p
    Conjugate,
}

#[derive(Subcommand, Debug)]
pub enum ClassifyOp {
    /// classify --weights over an epsilon grid (--input, optional)
    Weights,
    /// canonical witness for --case, --p, --len
    Canonical,
}

#[derive(Subcommand, Debug)]
pub enum BlocksOp {
    /// block system of --weights over the partition in --input
    Build,
    /// isometry check with lambda from --coeffs
    Isometry,
    /// greedy partition for the targets in --input
    Greedy,
    /// projection coefficients of --coeffs
    Project,
    /// contraction check of the projection on --coeffs
    Contraction,
    /// l^p_N design with --n and --count blocks
    Design,
    /// l^p_N isometry: --coeffs x, --input block ids
    Lpn,
}

#[derive(Subcommand, Debug)]
pub enum RosenthalOp {
    /// compare |sum c_n f_n|_p with the Rosenthal bound
    Check,
    /// q < 2 comparison with --q
    Lemma24,
    /// |sum c_n f_n|_r, exact or Monte Carlo
    Pnorm,
    /// three-valued variable for --p and --weight
    ThreeValued,
    /// symmetric stable samples for --t
    Sample,
}

#[derive(Subcommand, Debug)]
pub enum KhintchineOp {
    /// scalar coefficients from --coeffs
    Check,
    /// vector coefficients: --input is a matrix
    Kahane,
}

#[derive(Subcommand, Debug)]
pub enum StepOp {
    Integrate,
    /// L^r norm with --r
    Norm,
    /// squeeze by --k for exponent --p
    Squeeze,
    /// lift to coordinate --coord of --len unit intervals
    Lift,
    /// conditional expectation onto --keep
    Cond,
    /// branch projection onto --keep
    Branch,
    /// projection onto a designated span (--input {"f", "coordinate", "members"})
    Sproject,
    /// disjoint sum of the pair in --input
    Disjoint,
    /// dyadic level --level for exponent --p
    Dyadic,
    /// Haar ladder of --input along --order
    Haar,
}

#[derive(Subcommand, Debug)]
pub enum TreeOp {
    /// derived-set index of --rel
    Hindex,
    /// relation map check: --rel source, --input {"target", "map"}
    Mapcheck,
    /// dyadic embedding of --tree
    Embed,
    /// rank of --tree
    Rank,
    /// tree of rank --alpha, truncated by --depth and --width
    Build,
    /// dyadic sets attached to --n
    Branch,
    /// prefix order of --m and --n
    Dotprec,
    /// concatenation of the strings in --input
    Concat,
    /// --input {"u", "v"} level refinement check
    Levelprec,
    /// delta-membership of the level vector in --input
    Delta,
    /// disjoint lift of the level vector in --input
    Lift,
}

#[derive(Subcommand, Debug)]
pub enum SuiteOp {
    /// all criteria, aggregated
    Acceptance,
    /// one criterion, --n
    Criterion,
}

pub enum CliError {
    Core(lpspace::Error),
    Input(String),
    Usage(String),
}

impl From<lpspace::Error> for CliError {
    fn from(e: lpspace::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Input(_) => "input",
            CliError::Usage(_) => "usage",
        }
    }

    fn detail(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Input(s) | CliError::Usage(s) => s.clone(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(lpspace::Error::SizeCap { .. }) => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Usage(_) => 64,
        }
    }
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    let (doc, code) = match commands::run(&cli.command, &cli.opts) {
        Ok(outcome) => (outcome.doc, outcome.code),
        Err(e) => (json!({"error": {"kind": e.kind(), "detail": e.detail()}}), e.exit_code()),
    };
    if let Err(e) = emit(&doc, cli.opts.out.as_ref()) {
        eprintln!("lpspace: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
