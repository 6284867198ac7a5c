//! Construction of invariant tori of Hamiltonian systems by least-squares
//! fitting of a Fourier-parameterised phase-space surface.
//!
//! The pieces, bottom up:
//!
//! * [`model`]: the trigonometric torus surface, its angle derivatives,
//!   model actions and the orbit-family coefficient masks.
//! * [`dynamics`]: kinetic-plus-potential Hamiltonians (isochrone,
//!   logarithmic, perfect prolate spheroid, harmonic oscillator).
//! * [`objective`]: the residual vector of the flow, energy and action
//!   error functions, the least-squares frequency estimate, and the
//!   analytic Jacobian.
//! * [`solver`]: Levenberg–Marquardt over the flattened coefficients.
//! * [`probe`]: wavefront expansion over a lattice of action labels.
//! * [`verify`]: extrapolation orbit integration and Poincaré sections.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod objective;
pub mod output;
pub mod probe;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Highest supported number of degrees of freedom.
pub const MAX_DIM: usize = 2;
