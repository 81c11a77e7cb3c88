//! Simulation and verification toolkit for quasi-continuous-variable
//! computation with collective atomic spins in cavity interferometers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod error;
pub mod experiments;
pub mod network;
pub mod numerics;
pub mod optics;
pub mod spin;

pub use compiler::{Generator, PolynomialHamiltonian, PulseSequence};
pub use error::{Error, Result};
pub use experiments::ResultTable;
pub use spin::{
    build_collective_ops, evolve, CollectiveOps, Propagator, Space, SpinOperator, SpinState,
    SpinSystem, C64,
};
