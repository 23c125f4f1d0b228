use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-integrable sample at node {node}")]
    NonIntegrableSample { node: usize },

    #[error("no surface rule for this domain")]
    NoSurfaceRule,

    #[error("projection failed after {iterations} iterations (KKT residual {residual:e})")]
    ProjectionFailed { iterations: usize, residual: f64 },

    #[error("prox non-convergent after {iterations} iterations (KKT residual {residual:e})")]
    ProxNonConvergent { iterations: usize, residual: f64 },

    #[error("convexity violated: negative curvature {curvature:e} along Newton step")]
    ConvexityViolated { curvature: f64 },

    #[error("Hessian system singular")]
    HessianSystemSingular,

    #[error("field not in Z(Ω,H): tangency defect {defect:e} at boundary node {node}")]
    FieldNotTangent { defect: f64, node: usize },

    #[error("discretization degenerate: {0}")]
    DiscretizationDegenerate(String),

    #[error("cutoff insufficient: solution mass {mass:e} at the left cutoff")]
    CutoffInsufficient { mass: f64 },

    #[error("Neumann condition violated: residual {residual:e}")]
    NeumannViolated { residual: f64 },

    #[error("reflection system degenerate")]
    ReflectionSystemDegenerate,

    #[error("reflection guarantee violated: reflected point has G = {value:e} > 0")]
    ReflectionOutsideDomain { value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
