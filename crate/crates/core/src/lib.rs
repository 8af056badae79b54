//! Truncated Fock-space simulation of CHSH tests that combine click/no-click
//! photodetection with binned homodyne detection, including heralded
//! amplifiers at the source and local filters at the receivers.

pub mod bell;
pub mod error;
pub mod fock;
pub mod local;
pub mod measurement;
pub mod source;

pub use error::{Error, Result};

/// Library version, recorded in result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
