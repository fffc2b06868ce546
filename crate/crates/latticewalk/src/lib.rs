//! Exact and asymptotic n-step transition probabilities for irreducible
//! finite-range random walks on the integer lattice Z^d.
//!
//! See the crate README and the `examples/` directory for a tour.

pub mod asymptotics;
pub mod cli;
pub mod convex_geometry;
pub mod cumulant;
pub mod error;
pub mod exact_kernel;
pub mod fmt;
pub mod integer_lattice;
pub mod lattice_adapters;
pub mod models;
pub mod saddle;
pub mod walk_model;

pub use error::{Error, Result};
pub use walk_model::{WalkModel, WalkSpec};
