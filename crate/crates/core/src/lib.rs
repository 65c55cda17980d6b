//! Density evolution thresholds and finite-length simulation for regular
//! LDPC codes on the binary symmetric channel, with parity bits that see a
//! better channel than message bits.
//!
//! Three decoders are covered: Gallager A, the 3-level error-and-erasure
//! decoder, and belief propagation. Each is analysed in three setups:
//! uniform (every bit on the same channel), UDP (parity bits on a cleaner
//! channel) and doping (parity bits known to the decoder).

pub mod bp;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod gallager_a;
pub mod sim;
pub mod three_level;
pub mod threshold;

pub use ensemble::{
    average_crossover, design_rate, threshold_gain, ChannelSpec, EnsembleSpec, ProtectionMode,
};
pub use error::{Error, Result};
pub use threshold::{DeConfig, DensityEvolution, Probe, SearchOptions, ThresholdReport};
