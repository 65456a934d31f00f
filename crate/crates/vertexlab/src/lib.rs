//! Loop-group vertex operators on truncated Fock spaces.
//!
//! The crate builds the U(1) loop group machinery on the circle of length `L`
//! (cocycles, blips, normal-ordered implementers), checks bosonization against
//! an explicit fermionic wedge model, represents `W_{1+∞}` in both pictures, and
//! uses anyon correlators to construct Calogero–Sutherland eigenfunctions,
//! including the elliptic (finite temperature) case and its torus geometry.

pub mod calogero;
pub mod cli;
pub mod error;
pub mod fermion_oracle;
pub mod fock;
pub mod loopspace;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod series;
pub mod suites;
pub mod torus;
pub mod vertex;
pub mod walgebra;

pub use error::{Error, Result};
pub use scalar::{Scalar, C64, QC};
