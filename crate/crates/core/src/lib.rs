//! Calculus generated by a bijection `tau` of a real interval and the
//! ladder-operator factorization of second-order tau-difference eigenproblems.

pub mod bands;
pub mod calculus;
pub mod chain;
pub mod commands;
pub mod config;
pub mod covariance;
pub mod error;
pub mod expr;
pub mod gauge;
pub mod grid_fn;
pub mod hilbert;
pub mod io;
pub mod orbit;
pub mod qoracle;
pub mod residual;
pub mod riccati;
pub mod scenarios;
pub mod validate;

pub use error::{Error, Result};
pub use grid_fn::GridFunction;
pub use num_complex::Complex64;
pub use orbit::{Grid, GridMode, GridSpec, OrbitGrid, TauMap};
