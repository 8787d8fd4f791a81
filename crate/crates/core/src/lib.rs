//! Pseudo-spectral toolkit for the isentropic compressible Navier-Stokes
//! system on `T^ell x R^(3-ell)`: exact linear semigroup, nonlinear
//! exponential-integrator solver, reduced profile systems and large-time
//! decay diagnostics.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod field;
pub mod harness;
pub mod linear;
pub mod params;
pub mod profile;
pub mod solver;
pub mod spectral;

pub use domain::{DomainSpec, FrequencyVector, Grid};
pub use error::{NsasError, Result};
pub use field::{Spectra, StateField};
pub use params::{FluidParams, PressureLaw};
