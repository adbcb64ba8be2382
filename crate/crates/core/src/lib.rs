//! Simulation kernels for probing percolation and contact-process thresholds
//! on truncated Cayley graphs and on their local (Benjamini-Schramm) limits.

pub mod contact;
pub mod error;
pub mod graph;
pub mod limits;
pub mod percolation;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{EdgeTag, FamilySpec, FiniteGraph};
