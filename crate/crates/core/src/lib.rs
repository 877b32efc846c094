//! Numerical kernels for the nonhomogeneous incompressible
//! Navier-Stokes-Cahn-Hilliard system with the Landau double-well potential.
//!
//! Everything lives on a rectangular staggered (MAC) mesh: density, order
//! parameter, chemical potential and pressure at cell centers, velocity
//! components on cell faces. The crate is `no_std` and only needs `alloc`;
//! file formats, configuration and the CLI live in `nsch-sim`.
//!
//! One coupled step runs, in order:
//!
//! 1. [`transport::density_step`] with the old velocity,
//! 2. [`cahn_hilliard::ch_step`] with the new density and the old velocity,
//! 3. [`momentum::predictor_step`] with the new phase field,
//! 4. [`momentum::project`] onto discretely divergence-free fields,
//! 5. [`diagnostics::record`] plus the blow-up accumulator.
//!
//! [`coupled::step`] wires these together.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cahn_hilliard;
pub mod coupled;
pub mod diagnostics;
pub mod elliptic;
mod error;
pub mod grid;
pub mod materials;
pub mod momentum;
pub(crate) mod strain;
pub mod transport;
mod spectral;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Grid, ScalarField, State, VectorField};
pub use materials::ViscosityLaw;
