//! Random interlacements on `Z^d`: lattice combinatorics, simple random walk
//! and its Green functions, exact potential theory of finite sets, sampling
//! of the interlacement restricted to a window, vacant-set percolation
//! observables, and the arithmetic of the multiscale renormalization.

pub mod error;
pub mod exec;
pub mod interlace;
pub mod lattice;
pub mod percolation;
pub mod potential;
pub mod quad;
pub mod renorm;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use exec::Exec;
pub use lattice::{LatticePoint, Norm, Region, Sites};
pub use rng::RngStream;
pub use stats::Estimate;
