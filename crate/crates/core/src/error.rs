use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants fall into two groups: input/validation problems and numerical
/// failures (see [`Error::is_numerical`]). The CLI maps them to different
/// exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-positive value {value} at row {row}, part {part}")]
    NonPositivePart { row: usize, part: usize, value: f64 },

    #[error("zero parts found at {}", format_cells(.cells))]
    ZeroParts { cells: Vec<(usize, String)> },

    #[error("negative part {value} at row {row}, column \"{column}\"")]
    NegativePart {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("column \"{0}\" not found")]
    MissingColumn(String),

    #[error("duplicate column \"{0}\"")]
    DuplicateColumn(String),

    #[error("cannot parse \"{value}\" at row {row}, column \"{column}\"")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing value at row {row}, column \"{column}\"")]
    MissingValue { row: usize, column: String },

    #[error("insufficient data: {n} observations for {p} parameters")]
    InsufficientData { n: usize, p: usize },

    #[error("collinear design: columns {}", .columns.join(", "))]
    Collinear { columns: Vec<String> },

    #[error("no convergence after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        coefficients: Vec<f64>,
    },

    #[error("quasi-separation detected: |linear predictor| reached {max_eta:.1}")]
    Separation { max_eta: f64 },

    #[error("covariance matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input
    /// format: collinearity, non-convergence, separation, non-PSD covariance.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Collinear { .. }
                | Error::NonConvergence { .. }
                | Error::Separation { .. }
                | Error::NotPositiveSemidefinite
                | Error::InsufficientData { .. }
        )
    }
}

fn format_cells(cells: &[(usize, String)]) -> String {
    cells
        .iter()
        .map(|(row, col)| format!("(row {row}, \"{col}\")"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
