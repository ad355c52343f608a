//! Discrete rough-kernel operators, weighted Morrey-type norms, Muckenhoupt
//! weights and BMO on uniform grids in one and two dimensions, together with
//! a harness that measures the empirical constants of the corresponding
//! boundedness inequalities.

pub mod cli;
pub mod config;
pub mod error;
pub mod function;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod operators;
pub mod presets;
pub mod report;
pub mod rng;
pub mod scan;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
