//! Single-ancilla stochastic-gate simulation of Lindblad dynamics.
//!
//! A Lindblad problem is stepped with a random unitary acting on the system
//! plus one ancilla qubit; averaging many trajectories, each resetting the
//! ancilla after every step, reproduces the open-system evolution. The crate
//! also provides exact and first-order reference propagators, analytic error
//! bounds, and the drivers behind the `qnoise` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod export;
pub mod linalg;
pub mod model;
pub mod noise_gate;
pub mod propagator;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
