//! Exact-diagonalization laboratory for the transverse-field
//! Sherrington-Kirkpatrick model with general symmetric couplings.
//!
//! The crate builds the model on the full `2^N` spin space, evaluates Gibbs
//! expectations, Duhamel functions, replica-overlap moments and exchange
//! energies per disorder sample, and checks the inequality chain that bounds
//! the overlap variance from below over disorder ensembles.

pub mod bounds;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod par;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Version string embedded in every output file.
pub const VERSION: &str = concat!("qsklab ", env!("CARGO_PKG_VERSION"));
