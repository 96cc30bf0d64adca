//! Drift-diffusion model of a fixed-interface oxide layer: Fe(III) cations
//! and electrons migrating in a self-consistent potential, with
//! Butler-Volmer kinetics at the metal/oxide and oxide/solution interfaces.
//!
//! Time is discretized semi-implicitly (potential from the current
//! densities, then one linear implicit solve per carrier); space by vertex-
//! centred finite volumes with Scharfetter-Gummel fluxes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod diagnostics;
pub mod discretization;
mod error;
pub mod kinetics;
pub mod params;
pub mod timeloop;

pub use error::{BoundViolation, Error, Result};
pub use params::{ModelParams, Side, Species};
