use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coordinate in vector")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid ball: {0}")]
    InvalidBall(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("point lies inside ball {index} (depth {depth:.3e})")]
    PointInsideBall { index: usize, depth: f64 },
    #[error("point is not on the unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },
    #[error("exact decision unsupported in dimension {0}; use the heuristic search")]
    DimensionUnsupported(usize),
    #[error("bad dimension: plane dimension {m} must lie in 1..={max} for ambient dimension {dim}", max = .dim - 1)]
    BadDimension { dim: usize, m: usize },
    #[error("arcs with different periods cannot be combined")]
    MixedPeriods,
    #[error("degenerate axis (zero vector)")]
    DegenerateAxis,
    #[error("frame is not orthonormal: {0}")]
    NotOrthonormal(String),
    #[error("scene generation failed after {rejections} rejections")]
    GenerationFailed { rejections: usize },
    #[error("construction invariant violated: {0}")]
    InvariantViolation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ball index {index} out of range for scene with {len} balls")]
    BallIndex { index: usize, len: usize },
}

impl Error {
    /// Re-tags a `PointInsideBall` error with the index of the offending ball.
    pub(crate) fn at_ball(self, index: usize) -> Self {
        match self {
            Error::PointInsideBall { depth, .. } => Error::PointInsideBall { index, depth },
            other => other,
        }
    }
}
