pub mod cli;
pub mod correlation;
pub mod counting;
pub mod error;
pub mod experiments;
pub mod group;
pub mod lattice;
pub mod orbits;
pub mod regions;
pub mod stats;

pub use error::{Error, Result};
