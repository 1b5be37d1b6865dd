use crate::lattice::Site;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("site ({}, {}) lies outside the configuration box", .0.x, .0.y)]
    SiteOutsideBox(Site),
    #[error("geometry does not fit: {0}")]
    GeometryDoesNotFit(&'static str),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("no path of the requested color joins the two terminals")]
    NoSpanningCluster,
    #[error("the exploration walk is only defined on the triangular lattice")]
    UnsupportedLattice,
    #[error("block size m = {m} is outside 1..={n}")]
    BlockSizeOutOfRange { m: u32, n: u32 },
    #[error("arm pattern must have 2 or 3 arms (open, closed[, open])")]
    InvalidPattern,
    #[error("at least {needed} points are required, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("value {0} must be strictly positive")]
    NonPositive(f64),
    #[error("fit needs at least two distinct scales")]
    DegenerateFit,
    #[error("empty input")]
    EmptyInput,
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("successes ({successes}) exceed trials ({trials})")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("confidence level {0} must lie in (0, 1)")]
    InvalidConfidence(f64),
}
