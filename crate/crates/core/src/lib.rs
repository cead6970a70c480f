//! Dynamics of a slightly relativistic particle in an infinite square well:
//! eigenexpansion of Gaussian packets, exact evolution, quantum carpets,
//! Wigner functions, revival analysis and sub-Planck diagnostics.
//!
//! All quantities use hbar = m = L = 1, with times in units of the
//! non-relativistic revival time.

pub mod carpet;
pub mod cli;
pub mod error;
pub mod field;
pub mod numeric;
pub mod revival;
pub mod spectrum;
pub mod subplanck;
pub mod wavepacket;
pub mod wigner;

pub use error::{Error, Result};
pub use spectrum::{SystemConfig, TimeScales};
pub use wavepacket::{EigenExpansion, EvolvedState, PacketSpec};
