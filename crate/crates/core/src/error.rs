use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid metric specification: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension {0} is not supported here")]
    UnsupportedDimension(usize),
    #[error("point {point:?} lies on the excluded locus of the chart")]
    SingularPoint { point: Vec<f64> },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("finite-difference stencil of step {step} leaves the chart at {point:?}")]
    StepTooLarge { step: f64, point: Vec<f64> },
    #[error("conformal factor must be positive, got {0}")]
    NonPositiveConformalFactor(f64),
    #[error("evaluation at a pole of the spherical chart (angle {angle})")]
    PoleEvaluation { angle: f64 },
    #[error("normal of the level set is degenerate at {point:?}")]
    DegenerateNormal { point: Vec<f64> },
    #[error("decay fit is ill-conditioned: {0}")]
    FitIllConditioned(String),
    #[error("minimum induced scalar curvature vanishes on the sphere of radius {r}")]
    ZeroRhoMin { r: f64 },
    #[error("tail beyond the outer radius is not negligible (correction {correction}, value {value})")]
    TailNotNegligible { correction: f64, value: f64 },
    #[error("radial grid too coarse: {nodes} nodes across the support (need at least {required})")]
    GridTooCoarse { nodes: usize, required: usize },
    #[error("conformal potential u = 1 + v is not positive (min {0})")]
    NonPositiveU(f64),
    #[error("window leaves the chart: {0}")]
    WindowExitsChart(String),
    #[error("window grids do not match: {0}")]
    GridMismatch(String),
    #[error("surface has no cap model; the enclosed curvature integral is undefined")]
    MissingCap,
    #[error("cone-mass estimators disagree: {first} vs {second}")]
    EstimatesDisagree { first: f64, second: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
