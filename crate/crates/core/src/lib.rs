//! Local statistics of random domino tilings of Aztec diamonds.
//!
//! The crate is organised as a set of cross-checking layers:
//!
//! * [`exact`]: exact rational placement probabilities and creation rates,
//!   uniform and biased, from products of Krawtchouk coefficients.
//! * [`asymptotics`]: closed-form limits (arctangent law, average height
//!   function, saddle-point creation-rate estimates, tilt inversion).
//! * [`geometry`]: regions, colorings, tilings, height functions and their
//!   extremal extensions, polar-region classification.
//! * [`shuffle`]: exact random sampling by domino shuffling.
//! * [`oracle`]: brute-force enumeration of small regions.
//! * [`stats`]: Monte Carlo aggregation and empirical reports.
//! * [`render`]: SVG output.
//! * [`verify`]: the acceptance checks, shared by the CLI and the test suite.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod oracle;
pub mod render;
pub mod shuffle;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

/// Version string embedded in every generated file.
pub const VERSION: &str = concat!("aztec ", env!("CARGO_PKG_VERSION"));
