//! Myopic and rational strategic network formation with opinion dynamics.

pub mod analysis;
pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod hk;
pub mod model;
pub mod network;
pub mod rational;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{ModelParams, OpinionProfile, PeerGraph};
