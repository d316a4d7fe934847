//! Random Linial-Meshulam complexes `Y_d(n, p)`: adjacency matrices of the
//! `(d-1)`-cells, their spectra, closed-word combinatorics of the moments, and
//! the local weak limit of the line graph.

pub mod adjacency;
pub mod cells;
mod error;
pub mod format;
pub mod limits;
pub mod rng;
pub mod spectra;
pub mod words;

pub use error::LmError;
