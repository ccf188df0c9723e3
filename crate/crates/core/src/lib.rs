//! Asymptotic-preserving solvers for a one-dimensional kinetic
//! reaction-transport model written in Hopf-Cole variables, together with an
//! explicit kinetic reference solver, the limit Hamilton-Jacobi solver and
//! post-processing used by convergence and front-speed studies.
//!
//! Every solver is generic over the scalar type (`f32` or `f64`); the `*64`
//! aliases below fix double precision.

// `!(x > 0)` style checks are deliberate: they also reject NaN. Index loops
// over velocity nodes follow the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod discretization;
pub mod error;
pub mod explicit_ref;
pub mod hj_limit;
pub mod initial;
pub mod micromacro;
pub mod scalar;
pub mod studies;

pub use discretization::{Boundary, Equilibrium, EquilibriumKind, EquilibriumSpec, Grid};
pub use error::{Error, Result};
pub use explicit_ref::DistributionField;
pub use hj_limit::{Branch, HJField, HamiltonianEval};
pub use initial::InitialData;
pub use micromacro::{ArrowheadSystem, KineticField, MicroMacroConfig, NewtonReport};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type Equilibrium64 = Equilibrium<f64>;
pub type KineticField64 = KineticField<f64>;
pub type DistributionField64 = DistributionField<f64>;
pub type HJField64 = HJField<f64>;
pub type HamiltonianEval64 = HamiltonianEval<f64>;
pub type ArrowheadSystem64 = ArrowheadSystem<f64>;

pub type Grid32 = Grid<f32>;
pub type Equilibrium32 = Equilibrium<f32>;
pub type KineticField32 = KineticField<f32>;
