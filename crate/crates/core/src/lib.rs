//! Simulator for a self-sustainable-metasurface (SSM) assisted indoor mmWave
//! downlink: deterministic channel synthesis for a seat-row cabin, preset and
//! coverage-group construction, a randomized preset-size search, and a
//! two-stage max-min data-rate optimizer built on successive convex
//! approximation over an embedded mixed-integer conic solver.
//!
//! The crate is organized around the pipeline stages:
//!
//! * [`model`] — scenario configuration, cabin geometry, presets, coverage groups
//! * [`channel`] — channel synthesis, cascading, and the channel file format
//! * [`link`] — closed-form link physics (MRT, SNR, rate, harvested power)
//! * [`preset_search`] — Monte-Carlo reflecting-area sizing
//! * [`conic`] — operator-splitting conic solver with branch-and-bound
//! * [`group_opt`] — per-group convexified problem and the SCA/CCP iteration
//! * [`network_opt`] — network-wide time allocation and the RIS/SMS baselines
//! * [`oracle`] — brute-force verifiers for tiny instances

pub mod channel;
pub mod conic;
pub mod error;
pub mod group_opt;
pub mod link;
pub mod math;
pub mod model;
pub mod network_opt;
pub mod oracle;
pub mod preset_search;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
