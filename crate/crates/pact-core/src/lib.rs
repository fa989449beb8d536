//! Coloured random recursive trees with degree-dependent attachment.
//!
//! Growth, colour percolation statistics, generalised Pólya urns with their
//! Gaussian and non-Gaussian limits, root-cluster moments and small-`n`
//! exact oracles.

pub mod bell;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod pattern;
pub mod rng;
pub mod series;
pub mod special;
pub mod stats;
pub mod theory;
pub mod tree;
pub mod urn;

pub use error::{PactError, Result};
