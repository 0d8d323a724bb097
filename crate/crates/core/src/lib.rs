//! Voting-rule ensembles of randomly configured classifiers, together with
//! exact and simulated analysis of how often plurality elects the correct
//! class.

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod learners;
pub mod montecarlo;
pub mod theory;
pub mod types;
pub mod voting;

pub use error::{Error, Result};
