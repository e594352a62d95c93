//! Simulation of the AI development race game on structured populations.
//!
//! * [`game`]: payoff matrices, welfare and risk-dominance comparators,
//!   region boundaries and classification.
//! * [`networks`]: complete, lattice, Barabási–Albert and DMS graphs, degree
//!   classes, metrics and edge-list files.
//! * [`dynamics`]: Fermi imitation with zealots and interference.
//! * [`experiments`]: replicates, sweeps, zealot progressions, aggregation.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod game;
pub mod networks;
pub mod seeding;

pub use error::{Error, Result};
