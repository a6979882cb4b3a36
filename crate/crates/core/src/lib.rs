//! Simulation of one-dimensional cellular automata and communication
//! complexity of their prediction, invasion and cycle-length problems.

pub mod algebra;
pub mod analysis;
pub mod audit;
pub mod commcomp;
pub mod error;
pub mod gallery;
pub mod problems;
pub mod rule;
pub mod sim;
pub mod word;

pub use error::{Error, Result};
pub use rule::{Rule, State};
pub use sim::{OrbitCache, PerturbedConfig};
pub use word::{CyclicWord, Word};
