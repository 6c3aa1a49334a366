use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the solver kit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at species {species}, index {index}")]
    NonFinite { species: usize, index: usize },

    #[error("nonpositive density {value:e} (species {species}, cell {cell})")]
    NonPositiveDensity {
        species: usize,
        cell: usize,
        value: f64,
    },

    #[error("densities leave the simplex at cell {cell}: 1 - sum = {remainder:e}")]
    OutsideSimplex { cell: usize, remainder: f64 },

    #[error("densities do not sum to one at cell {cell}: sum = {sum}")]
    NotNormalized { cell: usize, sum: f64 },

    #[error("field is not mean-zero: species {species} sums to {sum:e}")]
    NotMeanZero { species: usize, sum: f64 },

    #[error("invalid friction matrix: {0}")]
    InvalidFriction(String),

    #[error("matrix is not symmetric positive definite ({0})")]
    NotSpd(String),

    #[error("linear solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("line search collapsed at Newton iteration {iteration} (residual {residual:e})")]
    LineSearchCollapse { iteration: usize, residual: f64 },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid step configuration: {0}")]
    InvalidStepConfig(String),

    #[error("spacing {spacing} does not divide the domain length {length}")]
    NonDivisibleSpacing { spacing: f64, length: f64 },

    #[error("time step {dt} does not divide the final time {final_time}")]
    NonDivisibleTimeStep { dt: f64, final_time: f64 },

    #[error("degenerate convergence fit: {0}")]
    DegenerateFit(String),

    #[error("manufactured solution leaves (0, 1): {0}")]
    InvalidManufactured(String),

    #[error("{}", config_message(.line, .field, .message))]
    Config {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn config_message(line: &Option<usize>, field: &Option<String>, message: &str) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!("config line {l}, field `{f}`: {message}"),
        (Some(l), None) => format!("config line {l}: {message}"),
        (None, Some(f)) => format!("config field `{f}`: {message}"),
        (None, None) => format!("config: {message}"),
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.map(str::to_owned),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
