use thiserror::Error;

use crate::micromacro::NewtonReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by grid construction, the solvers and post-processing.
///
/// Scalar payloads are stored as `f64` so the error type does not depend on
/// the scalar the solver runs with.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("CFL condition violated: v_max*dt/dx = {ratio} must be < 1")]
    Cfl { ratio: f64 },

    #[error("{name} must be a positive even count, got {value}")]
    OddCount { name: &'static str, value: usize },

    #[error("invalid equilibrium: {0}")]
    Equilibrium(String),

    #[error("numerical overflow in cell {cell}: {detail}")]
    Overflow { cell: usize, detail: String },

    #[error("singular arrowhead system in cell {cell}: |S| = {s:e}")]
    SingularSystem { cell: usize, s: f64 },

    #[error("Newton did not converge in cell {cell}: {report}")]
    NewtonDiverged { cell: usize, report: NewtonReport },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Hamiltonian solve failed for p = {p}, q = {q}: {detail}")]
    Hamiltonian { p: f64, q: f64, detail: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("maximum principle violated at step {step}, cell {cell}: {detail}")]
    MaxPrinciple {
        step: usize,
        cell: usize,
        detail: String,
    },

    #[error("negative density in explicit scheme at step {step}, cell ({i}, {j}): {value:e}")]
    NegativeDensity {
        step: usize,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("not enough samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("minimum of c(p) lies on the boundary of the search grid at p = {p}; widen the grid")]
    MinimumOnBoundary { p: f64 },

    #[error("no front crossing found: {0}")]
    NoCrossing(&'static str),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
