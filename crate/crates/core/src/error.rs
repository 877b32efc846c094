use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("field length {got} does not match grid (expected {expected})")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("{op}: boundary kind is unset")]
    BoundaryUnset { op: &'static str },

    #[error("{op}: produced a non-finite value at index {index}")]
    NonFinite { op: &'static str, index: usize },

    #[error("coefficient on {component}-face ({i}, {j}) is not positive: {value}")]
    NonPositiveCoefficient {
        component: char,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("density must be positive, found {value} in cell {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("{op}: time step {dt} violates the {limit} bound, admissible dt <= {admissible}")]
    Cfl {
        op: &'static str,
        limit: &'static str,
        dt: f64,
        admissible: f64,
    },

    #[error("velocity is not discretely divergence-free: max |div u| = {max_div} > {tol}")]
    NotDivergenceFree { max_div: f64, tol: f64 },

    #[error("conjugate gradient diverged on operator `{operator}` at iteration {iteration}")]
    SolverDiverged {
        operator: &'static str,
        iteration: usize,
    },

    #[error("{stage}: linear solve did not converge ({iterations} iterations, residual {residual:e})")]
    NotConverged {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
