//! Simulation and system identification for dual-axis piezoelectric
//! fast-steering mirrors.
//!
//! The plant is a Hammerstein chain per axis: a push-pull pair of Bouc-Wen
//! hysteresis operators, a slow creep transfer function and the
//! electromechanical dynamics, with two cross-axis transfer functions that
//! couple the X and Y channels.
//!
//! * [`signal`] generates the excitation records.
//! * [`hysteresis`] integrates the Bouc-Wen variants.
//! * [`linmod`] holds transfer functions, state-space models and their
//!   discretized simulation.
//! * [`mechanics`] builds the physical mirror state-space models.
//! * [`composite`] assembles the single-axis and dual-axis plants.
//! * [`ident`] fits every stage back from records.

pub mod composite;
pub mod error;
pub mod hysteresis;
pub mod ident;
pub mod linmod;
pub mod mechanics;
pub mod signal;

pub use error::{Error, Result};
