use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix dimension {0} unsupported (expected 2, 3 or 4)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix has {got} entries, expected {expected}")]
    EntryCount { expected: usize, got: usize },
    #[error("singular matrix")]
    Singular,
    #[error("group element must have determinant 1, got {0}")]
    DeterminantNotOne(String),
    #[error("unbound generator name {0:?}")]
    UnboundGenerator(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("no contraction axis: sigma1/sigma2 = {0} is not separated from 1")]
    NoContractionAxis(f64),
    #[error("point lies at infinity for this affine chart")]
    AtInfinity,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("radius {radius} exceeds cap {cap}")]
    RadiusOverCap { radius: usize, cap: usize },
    #[error("ratio undefined at identity")]
    RatioUndefinedAtIdentity,
    #[error("not a Z^2 representation: a_x*c_y != a_y*c_x")]
    NotZ2,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("resolution insufficient: erosion {erosion} >= target radius {radius}")]
    ResolutionInsufficient { erosion: f64, radius: f64 },
    #[error("sets are not certified disjoint (center distance {distance} <= radius sum {radius_sum})")]
    NotDisjoint { distance: f64, radius_sum: f64 },
    #[error("combinatorial budget exceeded: {count} words > budget {budget}")]
    BudgetExceeded { count: usize, budget: usize },
}
