use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logratio_core::models::Family;
use logratio_core::simplex::CoordinateScheme;

#[derive(Debug, Parser)]
#[command(
    name = "logratio",
    version,
    about = "Regression with compositional data in pivot logratio coordinates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Non-compositional response on the composition plus covariates.
    FitX(FitX),
    /// The composition as response, explained by covariates.
    FitY(FitY),
    /// One part explained by the remaining parts plus covariates.
    FitWithin(FitWithin),
    /// Write pivot coordinates as CSV to standard output.
    Transform(Transform),
    /// Variances of all pairwise logratios.
    Varmatrix(Varmatrix),
    /// Ordinary regression on raw parts, for comparison.
    NaiveLm(NaiveLm),
    /// Generate a synthetic dataset.
    Simulate(Simulate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Binomial => Family::Binomial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Orthonormal,
    Orthogonal,
}

impl From<SchemeArg> for CoordinateScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Orthonormal => CoordinateScheme::Orthonormal,
            SchemeArg::Orthogonal => CoordinateScheme::Orthogonal,
        }
    }
}

/// Input shared by every subcommand that reads data.
#[derive(Debug, Args)]
pub struct Input {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Compositional parts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub parts: Vec<String>,
    /// `reject`, or `replace:EPS` for multiplicative replacement of zeros.
    #[arg(long, default_value = "reject")]
    pub zero_policy: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ModelOpts {
    /// Non-compositional covariates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Orthogonal)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Parts left out of the printed table; they still enter estimation.
    #[arg(long, value_delimiter = ',')]
    pub hide_parts: Vec<String>,
    /// Append plain-language readings of significant coefficients.
    #[arg(long)]
    pub interpret: bool,
}

#[derive(Debug, Args)]
pub struct FitX {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub model: ModelOpts,
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,
}

#[derive(Debug, Args)]
pub struct FitY {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub model: ModelOpts,
}

#[derive(Debug, Args)]
pub struct FitWithin {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub model: ModelOpts,
    /// The part to explain; it must be one of `--parts`.
    #[arg(long)]
    pub target: String,
}

#[derive(Debug, Args)]
pub struct Transform {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value_t = SchemeArg::Orthogonal)]
    pub scheme: SchemeArg,
    /// Pivot part; defaults to the first of `--parts`.
    #[arg(long)]
    pub pivot: Option<String>,
}

#[derive(Debug, Args)]
pub struct Varmatrix {
    #[command(flatten)]
    pub input: Input,
}

#[derive(Debug, Args)]
pub struct NaiveLm {
    #[command(flatten)]
    pub input: Input,
    /// The response column (usually a part).
    #[arg(long)]
    pub response: String,
    /// Covariates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResponseArg {
    None,
    Gaussian,
    Binomial,
}

#[derive(Debug, Args)]
pub struct Simulate {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Full generator specification as JSON; overrides the options below.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Number of parts.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    /// Closure total of each row.
    #[arg(long, default_value_t = 100.0)]
    pub total: f64,
    /// Add a response driven by the coordinates with effects of 0.5.
    #[arg(long, value_enum, default_value_t = ResponseArg::None)]
    pub response: ResponseArg,
}
