//! Desk-scale OFDM channel-estimation testbed.
//!
//! A simulated Rayleigh multipath link produces coarse least-squares channel
//! estimates which a small image super-resolution CNN (SRCNN / FSRCNN) refines.
//! Classical LS, LMMSE, and MMSE estimators serve as baselines. Everything is
//! deterministic given the configured seeds.

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod models;
pub mod nn;
pub mod ofdm;
pub mod seeds;

pub use error::{Error, Result};
pub use ofdm::{ChannelMatrix, ChannelParams, Constellation, OfdmFrame, PilotPattern, Snr};

pub use nalgebra;
pub use num_complex;

