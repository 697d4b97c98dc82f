//! `tpcert` command-line front end.
//!
//! [`run`] parses arguments and executes a command in-process, returning the
//! exit code and captured output; the binary only prints and exits.
//!
//! Exit codes: 0 certified success, 1 certified negative verdict, 2 usage or
//! domain error, 3 undecided at the precision cap.

mod commands;

pub use commands::random_bessel_input;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use tpcert_core::scalar::parse_rational;
use tpcert_core::PrecisionPolicy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tpcert", version, about = "Certified total positivity of Bessel kernels")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Initial working precision in bits.
    #[arg(long, global = true, default_value_t = 64)]
    pub precision_start: u32,
    /// Largest working precision tried before giving up.
    #[arg(long, global = true, env = "TPCERT_PRECISION_CAP", default_value_t = 4096)]
    pub precision_cap: u32,
    /// Radius every computed entry must reach.
    #[arg(long, global = true, default_value_t = 1e-30)]
    pub target_rad: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl RunConfig {
    pub fn policy(&self) -> Result<PrecisionPolicy, String> {
        if !(self.target_rad > 0.0) {
            return Err(format!("--target-rad must be positive, got {}", self.target_rad));
        }
        PrecisionPolicy::new(self.precision_start, self.precision_cap).map_err(|e| e.to_string())
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enclosure of I_nu(x).
    Bessel(BesselArgs),
    /// Certify total positivity of a kernel matrix.
    CheckTp(CheckTpArgs),
    /// Print a kernel matrix.
    Matrix {
        #[command(subcommand)]
        kernel: KernelSpec,
    },
    /// Plücker coordinates of a row space.
    Pluecker(PointArgs),
    /// Whether a row space is a strictly totally positive Grassmannian point.
    Grassmann(PointArgs),
    /// Seeded random batches.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// The lattice heat flow of Bessel determinants.
    #[command(subcommand)]
    Heatflow(HeatflowCmd),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    Quadrature,
}

#[derive(Args, Debug)]
pub struct BesselArgs {
    /// Order: an integer, or a real such as 2.5 or 7/2.
    #[arg(long, allow_hyphen_values = true)]
    pub j: String,
    #[arg(long, allow_hyphen_values = true, value_parser = rational)]
    pub x: BigRational,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    pub method: Method,
}

#[derive(Args, Debug)]
pub struct CheckTpArgs {
    #[command(subcommand)]
    pub kernel: KernelSpec,
    /// Largest minor order; defaults to min(rows, cols).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Demand every minor be positive.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum KernelSpec {
    /// a_ij = I_{k_j}(x_i).
    Bessel {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = rational)]
        x: Vec<BigRational>,
    },
    /// A_ms = I_{s-m}(x) on inclusive ranges such as 0..5.
    Toeplitz {
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        x: BigRational,
        #[arg(long, allow_hyphen_values = true, value_parser = range)]
        rows: (i64, i64),
        #[arg(long, allow_hyphen_values = true, value_parser = range)]
        cols: (i64, i64),
    },
    /// kappa_alpha(x_i - y_j; lambda).
    Karlin {
        #[arg(long, value_parser = rational)]
        alpha: BigRational,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        lambda: BigRational,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = rational)]
        xs: Vec<BigRational>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = rational)]
        ys: Vec<BigRational>,
    },
    /// x_i^{y_j}.
    Vandermonde {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = rational)]
        xs: Vec<BigRational>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = rational)]
        ys: Vec<BigRational>,
    },
    /// Explicit rational entries, rows separated by ';'.
    Explicit {
        #[arg(long, allow_hyphen_values = true)]
        entries: String,
    },
}

#[derive(Args, Debug)]
pub struct PointArgs {
    /// Column indices of the Bessel matrix H_k.
    #[arg(long, value_delimiter = ',', requires = "x", conflicts_with = "entries")]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = rational)]
    pub x: Option<Vec<BigRational>>,
    /// Explicit rational entries, rows separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    pub entries: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum SampleCmd {
    /// Check strict total positivity of random Bessel matrices.
    BesselTp {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 15)]
        kmax: u32,
        /// Arguments are drawn from the grid 0.05, 0.10, ..., xmax.
        #[arg(long, default_value_t = 10)]
        xmax: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum HeatflowCmd {
    /// Central-difference residual of the flow equation.
    Residual {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', value_parser = rational)]
        w: Vec<BigRational>,
        #[arg(long)]
        kmax: u32,
        #[arg(long, value_parser = rational)]
        x1: BigRational,
        #[arg(long, value_parser = rational, default_value = "1e-4")]
        h: BigRational,
        /// Components with |rhs| at or below this are skipped.
        #[arg(long, default_value_t = 1e-300)]
        floor: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Include every component in the report.
        #[arg(long)]
        components: bool,
    },
    /// Integrate the flow from x1 = 0 and compare with direct determinants.
    Integrate {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', value_parser = rational)]
        w: Vec<BigRational>,
        #[arg(long)]
        kmax: u32,
        #[arg(long = "X1")]
        x1_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Extra x1 values at which to record the state.
        #[arg(long, value_delimiter = ',')]
        samples: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        cone_tol: f64,
    },
    /// Compare window sums of |f_k|^2 with the constant C(R).
    Bound {
        #[arg(long)]
        m: usize,
        #[arg(long = "R", value_parser = rational)]
        r: BigRational,
        #[arg(long)]
        kmax: u32,
    },
}

fn rational(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a range like 0..5, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("bad range bound {t:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    match commands::execute(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(msg) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}
