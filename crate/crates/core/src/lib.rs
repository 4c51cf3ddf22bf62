//! Pseudo-spectral incompressible Navier-Stokes on the periodic box together
//! with the diagnostics of the weak-in-space, log-in-time regularity
//! criterion: distribution functions and weak-Lebesgue / Lorentz norms,
//! criterion integrands and their time integrals, De Giorgi level-set
//! energies, the recursive decay lemma, the log-Gronwall bound and a dyadic
//! counterexample separating the criterion from Lorentz time norms.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases
//! below name the double-precision instances used by the command line tool.

pub mod config;
pub mod counterexample;
pub mod criteria;
pub mod degiorgi;
pub mod error;
pub mod field;
pub mod gronwall;
pub mod lorentz;
pub mod nse;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = field::Grid<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type SpectralField64 = field::SpectralField<f64>;
pub type Grid32 = field::Grid<f32>;
pub type ScalarField32 = field::ScalarField<f32>;
pub type VectorField32 = field::VectorField<f32>;
pub type SolverConfig64 = nse::SolverConfig<f64>;
pub type Solver64 = nse::Solver<f64>;
pub type Trajectory64 = nse::Trajectory<f64>;
pub type CylinderScheme64 = degiorgi::CylinderScheme<f64>;
pub type DyadicSchedule64 = counterexample::DyadicSchedule<f64>;
pub type BoundProblem64 = gronwall::BoundProblem<f64>;
