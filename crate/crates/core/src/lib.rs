#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Numerical laboratory for aggregation-diffusion equations and
//! variable-coefficient Patlak-Keller-Segel systems on uniform grids.

pub mod chemo;
pub mod columns;
pub mod config;
pub mod diagnostics;
pub mod diffusion;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod integrator;
pub mod interp;
pub mod kernels;
pub mod linalg;
pub mod output;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use scalar::Real;

pub type Grid = grid::GridSpec<f64>;
pub type Field = grid::ScalarField<f64>;
pub type Flux = grid::VectorField<f64>;
