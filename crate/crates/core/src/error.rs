use crate::ebcl::ProbeLabel;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("data length {len} does not match a {rows}x{cols} matrix")]
    ShapeLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not an orthogonal projector (deviation {deviation:e})")]
    NotProjector { deviation: f64 },
    #[error("beacon in mode {mode} cannot serve a {requested} emission")]
    ModeMismatch {
        mode: &'static str,
        requested: &'static str,
    },
    #[error("projected beacon mode requires a projector")]
    MissingProjector,
    #[error("no beacon value recorded for probe {0}")]
    MissingProbe(ProbeLabel),
    #[error(
        "reconstructed diagonal entry g[{index}] = {value:e} is below tolerance -{tolerance:e}"
    )]
    NegativeDiagonal {
        index: usize,
        value: f64,
        tolerance: f64,
    },
    #[error("requested {requested} extra dimensions but only {available} remain")]
    ExtraDimsTooLarge { requested: usize, available: usize },
    #[error("learned null space for user {user} is empty")]
    EmptyNullSpace { user: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
