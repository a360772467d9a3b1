//! Relativistic scattering in one dimension with the J-matrix method.
//!
//! A Dirac particle of mass `M` scatters off short-range vector `V(x)`,
//! scalar `S(x)` and pseudo-scalar `U(x)` potentials. The wave function is
//! expanded in Hermite spinors: a finite middle block carries the potential,
//! two outer tails carry the free motion through tridiagonal recursions, and
//! the transmission and reflection amplitudes follow from the finite Green
//! function at the block corner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod greens;
pub mod mathkit;
pub mod oracle;
pub mod potential;
pub mod refsol;
pub mod scattering;

pub use error::{Error, Result};
