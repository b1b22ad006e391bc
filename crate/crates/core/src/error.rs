use thiserror::Error;

pub type Result<T> = std::result::Result<T, VdError>;

/// Failures raised by the geometry, dummy engine, selectors and T-Rex layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VdError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("column is constant after centering (norm {norm:e})")]
    DegenerateColumn { norm: f64 },

    #[error("direction lies in the revealed subspace (orthogonal part {residual:e} of {norm:e})")]
    DegenerateDirection { residual: f64, norm: f64 },

    #[error("shadow dummy block has {found} values, expected n*L = {expected}")]
    ShadowShapeMismatch { expected: usize, found: usize },

    #[error("basis already spans the centered subspace (dimension {m})")]
    BasisExhausted { m: usize },

    #[error("fresh projections out of order: table has {rows} rows, basis has {basis} directions")]
    OutOfOrder { rows: usize, basis: usize },

    #[error("dummy {0} is already realized")]
    AlreadyRealized(usize),

    #[error("sampled orthogonal complement of dummy {0} is degenerate")]
    DegenerateResidual(usize),

    #[error("active Gram matrix is numerically singular (pivot {pivot:e}, tolerance {tol:e})")]
    SingularGram { pivot: f64, tol: f64 },

    #[error("response has zero norm after centering")]
    ZeroResponse,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("random experiment {experiment} failed: {source}")]
    Experiment {
        experiment: usize,
        #[source]
        source: Box<VdError>,
    },
}
