use crate::geometry::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("resolution too coarse: h = {h} is not below the thinnest feature {feature}")]
    ResolutionTooCoarse { h: f64, feature: f64 },

    #[error("point out of range: {0:?}")]
    PointOutOfRange(Point),

    #[error("chain not constructible at this radius (r = {0}); shrink r")]
    ChainNotConstructible(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed sparse matrix: {0}")]
    MalformedMatrix(String),

    #[error("grid too coarse for biharmonic stencil: {0} interior cells along an axis (need at least 5)")]
    GridTooCoarse(usize),

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("inadmissible (p,q) for this N: s = {s} is not in (1, {n})")]
    InadmissibleExponents { s: f64, n: usize },

    #[error("degenerate exponent system: theta_1 = {0} <= 1")]
    DegenerateExponents(f64),

    #[error("ball not contained in domain: radius {radius} >= interior distance {distance}")]
    BallEscapes { radius: f64, distance: f64 },

    #[error("zero-set too small: {zero} of {total} ball cells vanish, need at least half")]
    ZeroSetTooSmall { zero: usize, total: usize },

    #[error("source escapes exhaustion: {0} cells with f != 0 lie outside every subdomain")]
    SourceEscapesExhaustion(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
