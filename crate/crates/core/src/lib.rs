//! Heisenberg-picture simulation of atom-laser outcoupling driven by quantum
//! light, in one dimension and without atom-atom interactions.
//!
//! The untrapped atomic field and the probe light are expanded in mode
//! functions of the initial operators. [`single`] handles a single optical
//! mode, [`opo`] the twin-beam setup pumped by a parametric oscillator, and
//! [`observables`] turns snapshots into densities, number and flux statistics
//! and quadrature entanglement measures.

pub mod config;
pub mod error;
pub mod grids;
pub mod model;
pub mod observables;
pub mod opo;
pub mod optics;
pub mod propagate;
pub mod scenario;
pub mod single;

pub use error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
