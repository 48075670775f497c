//! Pseudo-spectral solver and diagnostics for the three-dimensional
//! generalized tropical climate model with horizontal viscosity, fractional
//! baroclinic dissipation and nonlinear velocity damping, on a periodic box.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod model;
pub mod multiplier;
pub mod norms;
pub mod ops;
pub mod random;
pub mod stepper;

mod fft;

pub use error::{Error, Result};
pub use field::{Field, Representation, VectorField};
pub use grid::{Axis, Grid};
pub use multiplier::{apply_multiplier, Multiplier};
