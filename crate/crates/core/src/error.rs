use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {point:?} lies outside the admissible box (component {component}, excursion {excursion:e})")]
    OutsideBox {
        point: Vec<f64>,
        component: usize,
        excursion: f64,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("monotonicity violated: forward increment {value:e} in component {component} at node {node}")]
    MonotonicityViolation {
        component: usize,
        node: usize,
        value: f64,
    },

    #[error("non-finite value in component {component} at node {node} (step {step})")]
    NonFinite {
        component: usize,
        node: usize,
        step: usize,
    },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("bracket failure in characteristic root solve at (t, x) = ({t}, {x})")]
    BracketFailure { t: f64, x: f64 },

    #[error("grids differ")]
    GridMismatch,

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
