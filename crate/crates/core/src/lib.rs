//! Discontinuous Galerkin discrete least-squares (DGDLS) solver for
//! hyperbolic conservation laws on equidistant and scattered collocation
//! points.
//!
//! The pieces build on each other bottom-up:
//!
//! - [`nodes`]: reference-element point sets and meshes
//! - [`dop`]: discrete orthonormal polynomial bases
//! - [`quadrature`]: least-squares quadrature rules and classical comparisons
//! - [`operator`]: the per-element semidiscrete operator and numerical fluxes
//! - [`time`]: SSPRK(3,3) stepping
//! - [`problems`]: benchmark problems and their reference solutions
//! - [`diagnostics`]: mass, energy, errors and convergence studies

pub mod diagnostics;
pub mod dop;
pub mod error;
pub mod flux;
mod linalg;
pub mod nodes;
pub mod operator;
pub mod problems;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod state;
pub mod time;

pub use error::{Error, Result};
