use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("polytope is not Delzant:\n{}", .0.join("\n"))]
    NotDelzant(Vec<String>),

    #[error("non-simple vertex {vertex}: facets {facets:?} all meet there")]
    NonSimpleVertex { vertex: String, facets: Vec<usize> },

    #[error("chop depth {eps} is not admissible at this vertex (must be < {bound})")]
    ChopTooDeep { eps: String, bound: String },

    #[error("operation needs dimension >= {required}, polytope has dimension {found}")]
    UnsupportedDimension { required: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("profile evaluated outside its domain at t = {t}: {reason}")]
    OutsideDomain { t: f64, reason: String },

    #[error("weight positivity violated: {0}")]
    Positivity(String),

    #[error("direction is degenerate for vertex localisation: {0}")]
    DegenerateDirection(String),

    #[error("circle mean did not converge (full and half rules differ by {0:e})")]
    Extrapolation(f64),

    #[error("singular Gram matrix (smallest eigenvalue {0:e})")]
    SingularGram(f64),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("point {0} is not a vertex of the polytope")]
    NotAVertex(String),

    #[error("test configuration: {0}")]
    TestConfig(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("expansion fit is ill-conditioned: {0}")]
    IllConditionedFit(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("no plot series available: {0}")]
    MissingSeries(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
