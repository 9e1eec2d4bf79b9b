//! Discrete-event simulator for LoRa electronic-shelf-label networks.
//!
//! The crate is organised around the stages of one simulated campaign:
//!
//! * [`link_budget`] — propagation, airtime and noise math in dB space,
//!   generic over the scalar type;
//! * [`deployment`] — gateway placement, ring-based device allocation
//!   (arithmetic progression or Fibonacci) and geometry generation;
//! * [`cluster`] — Lloyd k-means used for gateway siting and for the
//!   `cluster` CLI command;
//! * [`adr`] — per-cluster adaptation state machines: SNR-driven dynamic
//!   spreading factor at fixed power, and RSSI-driven dynamic power;
//! * [`channel`] — pure-ALOHA uplink scheduling, overlap detection and
//!   frame-level reception with capture;
//! * [`simulator`] — the scenario engine tying it all together, plus the
//!   metrics report;
//! * [`config`] — the JSON scenario schema and its defaults;
//! * [`report`] — CSV/JSON emission.
//!
//! The numeric layer ([`link_budget`], [`geometry`], [`cluster`]) is written
//! against the [`scalar::Scalar`] trait so it runs at `f32` or `f64`; the
//! event engine is instantiated at `f64` through the aliases below.

pub mod adr;
pub mod channel;
pub mod cluster;
pub mod config;
pub mod deployment;
pub mod error;
pub mod geometry;
pub mod link_budget;
pub mod report;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};

/// Concrete instantiations used by the event engine and the CLI.
pub type Point64 = geometry::Point<f64>;
pub type RadioConfig64 = link_budget::RadioConfig<f64>;
pub type PathLossParams64 = link_budget::PathLossParams<f64>;
pub type AntennaGains64 = link_budget::AntennaGains<f64>;
pub type SnrFloorTable64 = link_budget::SnrFloorTable<f64>;
pub type Clustering64 = cluster::Clustering<f64>;
