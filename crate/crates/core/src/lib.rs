//! Low-density Construction-A lattices over prime fields: finite-field linear
//! algebra, expander Tanner graphs, lattice construction, geometry, decoding,
//! goodness bounds and the Monte Carlo experiments built on them.

pub mod bounds;
pub mod decoding;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
