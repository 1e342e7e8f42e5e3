//! Core library for a road-constrained vehicular mobility model with fuzzy
//! destination selection, plus random-waypoint baselines and a lightweight
//! connectivity/traffic layer for comparing them.
//!
//! The pieces compose bottom-up:
//! - [`fuzzy`]: Gaussian memberships, product inference, center-average defuzzification
//! - [`environment`]: the city map (path graph + named sites) and shortest paths
//! - [`mobility`]: node classes, rule tables, the movement state machine
//! - [`netsim`]: unit-disk connectivity snapshots, CBR traffic, the five metrics

pub mod data;
pub mod environment;
pub mod error;
pub mod fuzzy;
pub mod geometry;
pub mod mobility;
pub mod netsim;

pub use error::{Error, Result};
pub use geometry::Point;
