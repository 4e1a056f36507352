use thiserror::Error;

use crate::hourglass::SaddleCertificate;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {}x{}, right is {}x{}", left.0, left.1, right.0, right.1)]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix data has {got} entries, expected {expected}")]
    InvalidData { expected: usize, got: usize },

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },

    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("matrix set must have at least one member")]
    EmptySet,

    #[error("member {index} has shape {}x{}, set shape is {}x{}", got.0, got.1, expected.0, expected.1)]
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("enumeration needs {required:.3e} leaf evaluations, budget is {budget}")]
    BudgetExceeded {
        required: f64,
        budget: u64,
        /// Best bound established before the budget was hit, if any.
        partial: Option<Box<crate::radii::RadiusBracket>>,
    },

    #[error("entry {value} at ({row}, {col}) of member {index} is not strictly positive")]
    NonPositive {
        index: usize,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("linearly ordered chain broken between members {lower} and {upper}")]
    ChainViolation { lower: usize, upper: usize },

    #[error("set is not an hourglass set: member {matrix_index} fails at u = {u:?}")]
    NotHourglass { matrix_index: usize, u: Vec<f64> },

    #[error("no saddle point found; best candidate ({}, {}) has residuals {:.3e}/{:.3e}",
        best.a_index, best.b_index, best.max_row_residual, best.min_col_residual)]
    NoSaddle { best: SaddleCertificate },

    #[error("controller does not fit the pair: {0}")]
    ControllerMismatch(String),

    #[error("problem file: {0}")]
    Schema(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
