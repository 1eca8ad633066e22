//! Numerical toolkit for Gaussian bosonic states: symplectic linear
//! algebra, entropies, Fisher information along the heat flow, additive
//! noise channels, and classical-capacity bounds, with a truncated Fock
//! cross-check oracle.

pub mod capacity;
pub mod channels;
pub mod epi;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod io;
pub mod parallel;
pub mod state;
pub mod symplectic;

pub use error::{Error, Result};

// re-exported so downstream binaries build vectors/operators against the
// same versions this crate links
pub use nalgebra;
pub use num_complex;
