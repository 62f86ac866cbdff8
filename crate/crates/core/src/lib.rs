//! Position verification for vehicular ad-hoc networks with subjective logic.
//!
//! The crate has two halves. The library half is the opinion algebra
//! ([`opinion`]), the detectors that turn beacon evidence into opinions
//! ([`detectors`]) and their fusion into a verdict ([`fusion`]). The simulator half
//! ([`sim`], [`attackers`], [`metrics`], [`config`], [`sweep`]) drives those detectors
//! over a synthetic road grid and reports per-message false and true positive rates.

pub mod attackers;
pub mod config;
pub mod detectors;
pub mod fusion;
pub mod geom;
pub mod metrics;
pub mod opinion;
pub mod sim;
pub mod sweep;

pub use fusion::{Classification, Detector, Verdict};
pub use geom::Vec2;
pub use opinion::Opinion;
