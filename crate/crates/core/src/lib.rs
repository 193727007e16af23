//! Baseband simulator of a PMCW radar network under PLL phase noise.
//!
//! Signal chain: code generation ([`codes`]), phase-noise synthesis
//! ([`phasenoise`]), geometry and link budget ([`scene`]), received baseband
//! ([`txrx`]), range/Doppler processing ([`dsp`]) and LOS-based phase-noise
//! compensation ([`compensation`]). [`experiment`] runs the whole chain from a
//! [`config`] file.

pub mod codes;
pub mod compensation;
pub mod config;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod export;
pub mod phasenoise;
pub mod scene;
pub mod txrx;
pub mod units;

pub use error::{Error, Result};
