//! Adaptive finite-element simulation of quasi-static brittle fracture with graph-based
//! modification of small voids.

pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod solver;
pub mod triset;
pub mod voidmod;

pub use error::{Error, Result};
pub use triset::TriangleSet;
