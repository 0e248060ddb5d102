//! Structural identities, fault maps and percolation statistics.

mod faults;
mod percolation;
mod structure;

pub use faults::{block_distances, reachability, FaultMap};
pub use percolation::{percolation_estimate, PercolationResult};
pub use structure::{check_star_reflection, direct_sum_residual, StarReflectionReport};
