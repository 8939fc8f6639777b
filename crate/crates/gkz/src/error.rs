use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GkzError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate simplex {0:?}")]
    DegenerateSimplex(Vec<usize>),
    #[error("column {0} is not in simplex {1:?}")]
    IndexNotInSimplex(usize, Vec<usize>),
    #[error("sector normalization needs a homogeneous configuration")]
    NormalizationImpossible,
    #[error("columns do not span Q^n")]
    ZeroVolume,
    #[error("subdivision is not a triangulation")]
    NotATriangulation,
    #[error("triangulation is not convergent")]
    NotConvergent,
    #[error("triangulations are not related by a single modification")]
    NotAdjacent,
    #[error("gamma factor hit a pole at term {0:?}")]
    PoleHit(Vec<u32>),
    #[error("series did not converge: last shell {last_shell:e} > tol {tol:e}")]
    NonConverged { last_shell: f64, tol: f64 },
    #[error("point outside the convergence domain: max local coordinate {0}")]
    OutsideDomain(f64),
    #[error("column {0} enters the simplex, not a power series in it")]
    NotASeriesInZj(usize),
    #[error("sector condition violated: arg zeta = {0} lies outside the sector")]
    SectorViolation(f64),
    #[error("contour Re s = {0} passes through a pole")]
    ContourHitsPole(f64),
    #[error("quadrature did not converge (estimate {0:e})")]
    QuadratureNotConverged(f64),
    #[error("resonant parameters: {0}")]
    ResonantParameters(String),
    #[error("representative mismatch: {0}")]
    RepresentativeMismatch(String),
    #[error("no argument choice satisfies the sector inequalities")]
    EmptySector,
    #[error("path margin too small; try r >= {suggested_r}")]
    MarginTooSmall { suggested_r: String },
    #[error("work budget exceeded")]
    BudgetExceeded,
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, GkzError>;
