use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "painleve", version, about = "Coupled Painleve VI hierarchy: linear systems, Hamiltonian flows, symmetries and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generalized hypergeometric series.
    #[command(subcommand)]
    Hg(HgCommand),
    /// Fuchsian, dual and confluent linear systems.
    #[command(subcommand)]
    Linear(LinearCommand),
    /// Integrate a Hamiltonian system and write the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Hamiltonian diagnostics.
    #[command(subcommand)]
    Dynamics(DynamicsCommand),
    /// Affine Weyl group action.
    #[command(subcommand)]
    Weyl(WeylCommand),
    /// End-to-end verification; the exit code is the number of failed reports.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Emit plot data as CSV.
    #[command(subcommand)]
    Plot(PlotCommand),
}

/// Complex number: `1.5`, `2i`, `0.5-1.2i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse::<Complex64>().map_err(|e| format!("bad complex number '{s}': {e}"))
}

#[derive(Subcommand, Debug)]
pub enum HgCommand {
    /// Evaluate the series and print `{"value", "terms_used"}` as JSON.
    Eval(HgEvalArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Upper parameters, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex, required = true)]
    pub upper: Vec<Complex64>,
    /// Lower parameters, comma-separated (may be empty).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex)]
    pub lower: Vec<Complex64>,
    /// Drop the `(1)_i` denominator from the coefficients.
    #[arg(long)]
    pub no_factorial: bool,
}

#[derive(Args, Debug)]
pub struct HgEvalArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Evaluation point, `|t| < 1` unless the series terminates.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub t: Complex64,
    /// Relative truncation tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
}

#[derive(Subcommand, Debug)]
pub enum LinearCommand {
    /// Fuchsian system of a generic parameter set.
    Build(BuildArgs),
    /// Dual Fuchsian system.
    Dual(BuildArgs),
    /// Confluent system of a degenerate parameter set.
    Confluent(BuildArgs),
    /// One fundamental solution: JSON with exponent, coefficients, value and residual.
    Fundamental(FundamentalArgs),
}

#[derive(Args, Debug)]
pub struct ParamsArg {
    /// Parameter file: `{"n", "alpha", "eta", "kind"}`.
    #[arg(long)]
    pub params: PathBuf,
    /// Override the kind with `Degenerate(r)`.
    #[arg(short = 'r')]
    pub r: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FundamentalArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Solution index `0..=n`.
    #[arg(short = 'k', long)]
    pub k: usize,
    /// Number of series coefficients to report.
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Real evaluation time `t > 0`.
    #[arg(long, default_value_t = 0.1)]
    pub eval_at: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemArg {
    /// Coupled sixth Painleve system in `(q, p)`.
    Cp6,
    /// Symmetric form in `(x, y)`.
    Symmetric,
    /// Degenerate system of level `r` in `(x, y)`.
    Degenerate,
    /// Fifth Painleve canonical form (`n = 1`, `r = 1`).
    P5,
    /// Third Painleve canonical form (`n = 1`, `r = 2`).
    P3,
    /// Rank-two canonical forms (`n = 2`, `r = 1, 2, 3`).
    N2r1,
    N2r2,
    N2r3,
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    #[command(flatten)]
    pub params: ParamsArg,
    /// Initial state: `{"t", "x", "y"}` or `{"t", "q", "p"}`.
    #[arg(long = "from")]
    pub from: PathBuf,
    /// Start time (defaults to the state's `t`).
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Number of equally spaced output times, including both ends.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// CSV columns: `t, re_<v>, im_<v>, ...` (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum DynamicsCommand {
    /// Compare analytic gradients with central differences at random points.
    CheckGradients(CheckGradientsArgs),
}

#[derive(Args, Debug)]
pub struct CheckGradientsArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// Rank for sampled parameters (fixed for the canonical forms).
    #[arg(short = 'n', long, default_value_t = 2)]
    pub n: usize,
    /// Level for the degenerate system.
    #[arg(short = 'r', long, default_value_t = 1)]
    pub r: usize,
    /// Use this parameter file instead of sampling.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pass bound on the worst relative error.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum WeylCommand {
    /// Apply a word (letters applied left to right) to a symmetric state.
    Apply(WeylApplyArgs),
    /// Check every `r_i^2` and `(r_i r_j)^m` relation at random regular points.
    VerifyRelations(VerifyRelationsArgs),
}

#[derive(Args, Debug)]
pub struct WeylApplyArgs {
    /// Generator indices, e.g. `0,3,1`.
    #[arg(long)]
    pub word: String,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    /// Override the state's time.
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyRelationsArgs {
    #[arg(short = 'n', long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Also write the reports as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Omit wall times so reports for equal seeds are identical.
    #[arg(long)]
    pub no_timing: bool,
    /// Print every measurement, not only failures.
    #[arg(short = 'v', long)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Every scenario and every acceptance criterion.
    All(RunArgs),
    /// Fuchsian solutions, spectra and the round trip (`n` in 1..=4).
    Particular {
        #[arg(short = 'n', long)]
        n: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Confluence, confluent solutions and canonical forms (`n` in 1..=3).
    Degeneration {
        #[arg(short = 'n', long)]
        n: Option<usize>,
        #[arg(short = 'r', long)]
        r: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Weyl relations, parameter action and solution mapping (`n` in 1..=3).
    Weyl {
        #[arg(short = 'n', long)]
        n: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// The acceptance criteria alone, or one of them.
    Criteria {
        #[arg(short = 'k', long)]
        k: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum PlotCommand {
    /// Columns `t, re, im, terms` of a series on an equally spaced grid.
    Series(PlotSeriesArgs),
    /// Same as `integrate`.
    Trajectory(IntegrateArgs),
    /// Columns `depth, residual`: truncated series residual in the Fuchsian system.
    ResidualSweep(ResidualSweepArgs),
}

#[derive(Args, Debug)]
pub struct PlotSeriesArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResidualSweepArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(short = 'k', long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 0.3)]
    pub t: f64,
    /// Truncation depths, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    pub depths: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
