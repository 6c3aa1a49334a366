//! Conservative, entropy-stable and positivity-preserving finite differences
//! for Maxwell–Stefan diffusion on periodic staggered grids in one and two
//! dimensions, together with the harness that verifies the scheme.
//!
//! Layers, bottom up:
//!
//! * [`grid`]: lattices, cell and edge fields, `D_h`, `d_h`, averaging, inner products.
//! * [`mixture`]: friction coefficients and the per-edge tensor `D̂`.
//! * [`entropy`]: the discrete entropy, the weighted Laplacian `L_Φ`, its inverse and dual norm.
//! * [`stepper`]: one implicit-explicit step solved by damped Newton, and the time loop.
//! * [`diagnostics`]: audits, convergence studies, the truncation probe and CSV output.
//! * [`config`] and [`app`]: the text configuration and the drivers behind the `mstefan` binary.

// Negated comparisons reject NaN along with out-of-range values; index loops
// mirror the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod config;
pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod initial;
pub mod linalg;
pub mod mixture;
pub mod stepper;

pub use entropy::{MeanZeroField, ReducedDensities};
pub use error::{Error, Result};
pub use grid::{CellField, EdgeField, GridSpec};
pub use mixture::{EdgeDiffusionTensor, FrictionMatrix};
pub use stepper::{SimulationState, StepConfig, StepResult};
