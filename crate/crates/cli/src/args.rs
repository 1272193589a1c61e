//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "stcalc", version, about = "(s,t)-calculus calculator and equation solver")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Global {
    /// Arithmetic backend; `auto` picks exact rationals when the golden pair is rational.
    #[arg(long, value_enum, default_value_t = BackendArg::Auto, global = true)]
    pub backend: BackendArg,
    /// Significant decimal digits of the float backend [env: ST_PANTO_PRECISION, default 30].
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    /// Series order N.
    #[arg(long, default_value_t = 16, global = true)]
    pub order: usize,
    /// Decay tolerance of infinite sums in the float backend [default 10^-precision].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    Rational,
    Float,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// (s,t)-numbers {0}..{N} or their factorials.
    Numbers {
        #[command(flatten)]
        st: StArgs,
        #[arg(long)]
        upto: usize,
        /// Emit {n}! instead of {n}.
        #[arg(long)]
        factorial: bool,
    },
    /// Evaluate a polynomial or a special function at points.
    Eval {
        #[command(flatten)]
        st: StArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "special", required_unless_present = "special")]
        expr: Option<String>,
        #[arg(long, value_enum)]
        special: Option<Special>,
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated evaluation points.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// (s,t)-derivative of a polynomial, as coefficients or at points.
    Derive {
        #[command(flatten)]
        st: StArgs,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// (s,t)-integral of a polynomial over [from, to].
    Integrate {
        #[command(flatten)]
        st: StArgs,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    /// Solve a linear or Bernoulli proportional equation.
    Solve(SolveArgs),
    /// Recompute the residual certificate of a solve document.
    Verify {
        /// Path to a JSON document written by `solve`; `-` reads standard input.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the identity suite and report the defect of each identity.
    Identities {
        #[command(flatten)]
        st: StArgs,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Special {
    /// exp(x, u).
    Exp,
    /// Exp(x) = exp(x, phi).
    ExpPhi,
    /// Exp'(x) = exp(x, phi').
    ExpPhiPrime,
    /// E(a, b; x, u).
    Pantograph,
    /// E(1, -q; x, q) = Theta_0((1 - q) x, 1/phi).
    Theta,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SpecArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub b: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub u: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    IntegrationFactor,
    SeriesLinear,
    Operator,
    Bernoulli,
    UBernoulli,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayArg {
    PhiPrime,
    Phi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    General,
    ThetaLiteral,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub st: StArgs,
    #[arg(long, value_enum)]
    pub family: Family,
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Coefficient: a polynomial for integration-factor and bernoulli, a number otherwise.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub alpha: String,
    /// Forcing polynomial, or the operator-method constant.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub beta: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub gamma: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub delta: String,
    /// Weight of the homogeneous operator-method solution.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub c: String,
    /// Initial value y(0), or y(eta) with --eta.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub y0: String,
    /// Anchor point of the initial value (integration-factor only).
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub eta: String,
    /// Bernoulli order.
    #[arg(long, allow_hyphen_values = true, default_value = "2")]
    pub n: String,
    #[arg(long, value_enum, default_value_t = DelayArg::PhiPrime)]
    pub delay: DelayArg,
    #[arg(long, value_enum, default_value_t = FormArg::General)]
    pub form: FormArg,
    /// Comma-separated sample points [default 0.1,0.2,0.3,0.4,0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
}
