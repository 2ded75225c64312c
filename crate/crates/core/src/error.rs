use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("half extents must be strictly positive")]
    NonPositiveExtent,

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("dual program is unbounded (primal infeasible)")]
    DualUnbounded,

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("numerically singular pivot ({0:e})")]
    SingularPivot(f64),

    #[error("equality constraint has an all-zero coefficient vector")]
    ZeroKappa,

    #[error("reduced inequality right-hand side is negative ({0:e})")]
    NegativeReducedRhs(f64),

    #[error("reconstructed eliminated component is negative ({0:e})")]
    NegativeReconstruction(f64),

    #[error("Lemke ray termination")]
    RayTermination,

    #[error("no solvable complementary basis")]
    NoComplementaryBasis,

    #[error("problem too large for enumeration: n = {0}")]
    TooLarge(usize),

    #[error("duplicate batch tag ({0}, {1}, {2})")]
    DuplicateTag(usize, usize, usize),

    #[error("worker count must be at least one")]
    InvalidWorkers,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("trace does not match scenario: {0}")]
    TraceMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
