//! Numerically exact engine for block-encoding circuits built on truncated
//! Dyson and Taylor series, applied matrix-free to multi-register state
//! vectors and verified against brute-force propagator oracles.

pub mod circuit;
pub mod dyson;
pub mod encoding;
pub mod error;
pub mod gadgets;
pub mod models;
pub mod operator;
pub mod resources;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use operator::{ComplexOperator, StateVector};
