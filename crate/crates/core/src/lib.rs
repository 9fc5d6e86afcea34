//! Simulator for hyperentangled photon protocols.
//!
//! States are pure amplitude vectors over labelled qudit registers, or
//! classical mixtures of them. Every protocol runs in two modes: exact
//! enumeration of all measurement branches, or Monte Carlo trajectories
//! drawn with a seeded generator.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod optics;
pub mod protocols;
pub mod qnd;
pub mod state;

pub use error::{Error, Result};
