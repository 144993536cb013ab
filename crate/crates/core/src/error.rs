use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cost matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("cost matrix entry ({row}, {col}) = {value} is negative or not finite")]
    BadCost { row: usize, col: usize, value: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("fixed-point iteration did not converge after {iterations} iterations (last gap {last_gap:e})")]
    NotConverged { iterations: usize, last_gap: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("kernel row {row} normalization off by {deviation:e}")]
    RowNormalization { row: usize, deviation: f64 },
    #[error("operator series diverges: composed norm {norm} is not below one")]
    Divergent { norm: f64 },
    #[error("point {z} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
