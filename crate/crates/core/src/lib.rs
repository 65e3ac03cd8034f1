//! Numerics for magnetic exchange couplings in flat-band stub and diamond
//! spin chains: tight-binding spectra, compact localized states, the
//! flat-band quantum metric, carrier-mediated exchange couplings at half
//! filling, closed-form asymptotic references, and decay-law analysis.
//!
//! The library is organized around [`chain::ChainSpec`], which fixes the
//! geometry and couplings of a chain; everything downstream is a pure,
//! deterministic function of a spec plus numerical parameters.

pub mod analysis;
pub mod asymptotics;
pub mod chain;
pub mod couplings;
pub mod eigen;
pub mod error;
pub mod output;
pub mod qmetric;
pub mod spectrum;

pub use chain::{Boundary, ChainSpec, Family, Orbital, SpinSector, Sublattice};
// re-exports filled in as modules land
pub use error::{Error, Result};


/// Version string recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
