//! Multi-cell massive-MIMO models for cellular networks that serve both
//! aerial users (UAVs) and ground users (GUEs).
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything here is a pure function of its inputs and an explicit
//! RNG stream; file formats, the CLI and thread pools live in the `uavmimo`
//! companion crate.
//!
//! Module map:
//!
//! - [`config`]: scenario constants, validation, seeded substreams
//! - [`geometry`]: hexagonal layout, user drops, UPA steering vectors
//! - [`channel`]: UMa-style LoS probability, path loss, channel vectors, mobility
//! - [`pilot`]: Zadoff-Chu pilots, reuse assignment, uplink pilot reception
//! - [`decontam`]: spatial matched filter, peak detection, null-space
//!   projection and common-path identification
//! - [`link`]: RSRP association, MRT precoding, downlink SINR, CDFs
//! - [`tracking`]: angle measurement, angular-speed prediction, Kalman tracking
//! - [`swarm`]: two-phase relay time split
//! - [`scenario`]: one Monte-Carlo drop / one tracking trajectory end to end

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod config;
pub mod decontam;
mod error;
pub mod geometry;
pub mod link;
pub mod math;
pub mod pilot;
pub mod scenario;
pub mod swarm;
pub mod tracking;

pub use config::{derive_substream, ScenarioConfig, SubStream};
pub use error::{Error, Result};
pub use math::ChannelVector;

pub(crate) mod prelude {
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    #[allow(unused_imports)]
    pub use num_traits::Float;
}
